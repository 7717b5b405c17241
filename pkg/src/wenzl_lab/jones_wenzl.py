"""Jones-Wenzl projections p_k on (C^N)^{(x) k} and irreducible-block bases.

p_k is the unique nonzero self-adjoint idempotent killed by every
adjacent cup-cap, built bottom-up through the Wenzl recursion

    p_k = iota (x) p_{k-1}
        - ([k-1]_q/[k]_q) (iota (x) p_{k-1}) (T_1 T_1^* (x) iota^{(x) k-2}) (iota (x) p_{k-1}).

Because the middle factor is the rank-N^{k-2} Gram matrix U U^T of the
cup columns, the sandwich collapses to a low-rank update
X - c (XU)(XU)^T, which is the only matrix work per level.

Projections and extracted orthonormal bases are cached per (N, k); an
optional on-disk cache (WENZL_LAB_CACHE_DIR) stores the JSON form.
"""

from __future__ import annotations

import os
import threading
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .qnum import QParams, dim_irrep, q_int
from .tensor_core import DEFAULT_DIM_CAP, TensorOperator, TensorShape, TensorVector, _check_cap

__all__ = [
    "JwProjection",
    "JwVerification",
    "IrrepBasis",
    "jw_projection",
    "verify_jw",
    "onb_of_irrep",
    "jw_fixes",
    "clear_caches",
]

CACHE_DIR_ENV = "WENZL_LAB_CACHE_DIR"

IDEMPOTENCE_TOL = 1e-9
SYMMETRY_TOL = 1e-12
TRACE_RTOL = 1e-8
CAP_ANNIHILATION_TOL = 1e-9

_lock = threading.Lock()
_jw_cache: dict[tuple[int, int], "JwProjection"] = {}
_basis_cache: dict[tuple[int, int], "IrrepBasis"] = {}


@dataclass(frozen=True)
class JwProjection:
    """A Jones-Wenzl projection: level k over rank params.n."""

    params: QParams
    k: int
    op: TensorOperator


@dataclass(frozen=True)
class JwVerification:
    """Max residuals of the four defining properties of a JW projection."""

    n: int
    k: int
    idempotence: float
    symmetry: float
    trace_rel: float
    cap_annihilation: float
    ok: bool


@dataclass(frozen=True)
class IrrepBasis:
    """Orthonormal columns spanning range(p_k); shape N^k x round([k+1]_q)."""

    params: QParams
    k: int
    columns: np.ndarray

    @property
    def dim(self) -> int:
        return self.columns.shape[1]


def clear_caches() -> None:
    """Drop all cached projections and bases (memory pressure relief)."""
    with _lock:
        _jw_cache.clear()
        _basis_cache.clear()


def _disk_path(n: int, k: int) -> str | None:
    root = os.environ.get(CACHE_DIR_ENV)
    if not root:
        return None
    return os.path.join(root, f"jw_n{n}_k{k}.json")


def _disk_load(p: QParams, k: int) -> TensorOperator | None:
    path = _disk_path(p.n, k)
    if path is None or not os.path.exists(path):
        return None
    try:
        with open(path, "r", encoding="ascii") as fh:
            op = TensorOperator.from_json(fh.read())
        dim = p.n**k
        if op.data.shape != (dim, dim):
            return None
        # cheap corruption check before trusting a cached projector
        if abs(np.trace(op.data) - dim_irrep(p, k)) > 1e-6 * dim_irrep(p, k):
            return None
        return op
    except (OSError, ValueError, KeyError):
        return None


def _disk_store(n: int, k: int, op: TensorOperator) -> None:
    path = _disk_path(n, k)
    if path is None:
        return
    try:
        os.makedirs(os.path.dirname(path), exist_ok=True)
        tmp = f"{path}.tmp.{os.getpid()}"
        with open(tmp, "w", encoding="ascii") as fh:
            fh.write(op.to_json())
        os.replace(tmp, path)
    except OSError:
        pass  # the disk cache is best-effort only


def _wenzl_step(p: QParams, k: int, prev: np.ndarray) -> np.ndarray:
    """One recursion level: p_k from p_{k-1} as a low-rank update."""
    n = p.n
    dim = n**k
    rest = n ** (k - 2)
    x = np.kron(np.eye(n), prev)
    # Y = (iota (x) p_{k-1}) U with U the cup columns: U[(a,b,c), j] = delta_ab delta_cj
    y = np.einsum("xbbj->xj", x.reshape(dim, n, n, rest))
    c = q_int(p, k - 1) / q_int(p, k)
    out = x - c * (y @ y.T)
    return (out + out.T) / 2.0


def jw_projection(p: QParams, k: int, max_dim: int = DEFAULT_DIM_CAP) -> JwProjection:
    """The level-k Jones-Wenzl projection, built (and cached) bottom-up.

    k = 0 is the scalar 1 on the empty tensor power; k = 1 the identity.
    """
    if k < 0:
        raise ValueError(f"level must be >= 0, got {k}")
    _check_cap(p.n, k, max_dim)
    key = (p.n, k)
    hit = _jw_cache.get(key)
    if hit is not None:
        return hit
    with _lock:
        hit = _jw_cache.get(key)
        if hit is not None:
            return hit
        start = k
        while start > 1 and (p.n, start - 1) not in _jw_cache:
            start -= 1
        for level in range(start, k + 1):
            lk = (p.n, level)
            if lk in _jw_cache:
                continue
            shape = TensorShape(p.n, level)
            if level == 0:
                op = TensorOperator(shape, shape, np.ones((1, 1)))
            elif level == 1:
                op = TensorOperator(shape, shape, np.eye(p.n))
            else:
                op = _disk_load(p, level)
                if op is None:
                    prev = _jw_cache[(p.n, level - 1)].op.data
                    op = TensorOperator(shape, shape, _wenzl_step(p, level, prev))
                    _disk_store(p.n, level, op)
            _jw_cache[lk] = JwProjection(p, level, op)
        return _jw_cache[key]


def _cap_annihilation_residual(data: np.ndarray, n: int, k: int) -> float:
    """max_i ||(iota^{i-1} (x) T_1 T_1^* (x) iota^{k-i-1}) p||_max.

    Applying T_1^* at legs (i, i+1) already carries the full magnitude,
    since T_1 only scatters those values into fixed positions.
    """
    if k < 2:
        return 0.0
    dim = n**k
    worst = 0.0
    for i in range(1, k):
        left = n ** (i - 1)
        right = n ** (k - i - 1)
        blocks = data.reshape(left, n, n, right * dim)
        contracted = np.einsum("abbc->ac", blocks)
        worst = max(worst, float(np.abs(contracted).max()))
    return worst


def verify_jw(jw: JwProjection) -> JwVerification:
    """Residuals of idempotence, symmetry, trace, and cap annihilation."""
    data = jw.op.data
    p, k = jw.params, jw.k
    idem = float(np.abs(data @ data - data).max())
    sym = float(np.abs(data - data.T).max())
    want_trace = dim_irrep(p, k)
    trace_rel = abs(float(np.trace(data)) - want_trace) / want_trace
    cap = _cap_annihilation_residual(data, p.n, k)
    ok = (
        idem <= IDEMPOTENCE_TOL
        and sym <= SYMMETRY_TOL
        and trace_rel <= TRACE_RTOL
        and cap <= CAP_ANNIHILATION_TOL
    )
    return JwVerification(p.n, k, idem, sym, trace_rel, cap, ok)


def onb_of_irrep(p: QParams, k: int, max_dim: int = DEFAULT_DIM_CAP) -> IrrepBasis:
    """Orthonormal basis of H_k = range(p_k) from a symmetric eigensolve.

    The spectrum must cluster at {0, 1}: any eigenvalue inside the guard
    band (0.25, 0.75) signals accumulated error and raises.
    """
    key = (p.n, k)
    hit = _basis_cache.get(key)
    if hit is not None:
        return hit
    jw = jw_projection(p, k, max_dim=max_dim)
    vals, vecs = np.linalg.eigh(jw.op.data)
    if bool(np.any((vals > 0.25) & (vals < 0.75))):
        raise InvariantViolation(
            f"JW spectrum at (n={p.n}, k={k}) has eigenvalues inside the "
            f"guard band (0.25, 0.75): numerical failure"
        )
    keep = vals > 0.5
    want = round(dim_irrep(p, k))
    got = int(np.count_nonzero(keep))
    if got != want:
        raise InvariantViolation(
            f"range(p_{k}) at n={p.n} has numerical rank {got}, expected {want}"
        )
    basis = IrrepBasis(p, k, np.ascontiguousarray(vecs[:, keep]))
    with _lock:
        _basis_cache.setdefault(key, basis)
    return _basis_cache[key]


def jw_fixes(jw: JwProjection, v: TensorVector) -> float:
    """||p_k v - v||; vanishes on words with no adjacent repeated letter."""
    if v.shape != jw.op.in_shape:
        raise ValueError(f"vector shape {v.shape} does not match p_k on {jw.op.in_shape}")
    return float(np.linalg.norm(jw.op.data @ v.data - v.data))
