"""Schmidt analysis of the embedded subspaces alpha(H_k) in H_l (x) H_m.

Everything here revolves around one scalar: the largest squared Schmidt
coefficient lambda_1 of alpha(xi) over unit xi in H_k.  Its exact
supremum is [k+1]_q/theta_q(k,l,m), certified from above by the
rapid-decay bound and attained on the alternating-word witness family,
whose top Schmidt values form a flat plateau of size
|A| = (N-2)(N-1)^{r-1}.
"""

from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation
from .jones_wenzl import jw_fixes, jw_projection
from .qnum import (
    AdmissibleTriple,
    QParams,
    q_factorial_log,
    rd_bound,
    theta_net_log,
)
from .tensor_core import DEFAULT_DIM_CAP, TensorShape, TensorVector, basis_vector
from .vertex import EquivariantIsometry, isometry

__all__ = [
    "SchmidtReport",
    "RdCertificate",
    "MaxSchmidtResult",
    "SaturationWitness",
    "SaturationReport",
    "HigherRankReport",
    "SeparabilityWitness",
    "EntropyDimTradeoff",
    "schmidt_spectrum",
    "rd_certificate",
    "max_schmidt_optimizer",
    "saturation_witness",
    "verify_saturation",
    "higher_rank_value",
    "separability_witness_highest_weight",
    "entropy_dim_tradeoff",
]

RANK_TOL = 1e-8
PLATEAU_RTOL = 1e-8
PLATEAU_GAP = 1e-10
WITNESS_FIX_TOL = 1e-9


def _entropy_from_lambdas(lambdas: np.ndarray) -> float:
    total = float(lambdas.sum())
    probs = lambdas[lambdas > 0.0] / total
    return float(-(probs * np.log(probs)).sum())


@dataclass(frozen=True)
class SchmidtReport:
    """Squared Schmidt coefficients (descending) across one bipartite cut."""

    coefficients: np.ndarray
    entropy: float
    max: float
    numerical_rank: int


def schmidt_spectrum(v: TensorVector, split: int, rank_tol: float = RANK_TOL) -> SchmidtReport:
    """Schmidt data of v across legs [1..split] vs the rest.

    Coefficients are squared singular values and sum to ||v||^2; the
    entropy is computed on the normalized spectrum, natural log.
    """
    nrm2 = float(v.data @ v.data)
    if nrm2 <= 1e-300:
        raise ValueError("Schmidt spectrum of the zero vector is undefined")
    legs = v.shape.legs
    if not 0 <= split <= legs:
        raise ValueError(f"split {split} out of range 0..{legs}")
    mat = v.data.reshape(v.shape.n**split, -1)
    sigma = np.linalg.svd(mat, compute_uv=False)
    lambdas = sigma * sigma
    rank = int(np.count_nonzero(lambdas > rank_tol * lambdas[0]))
    return SchmidtReport(
        coefficients=lambdas,
        entropy=_entropy_from_lambdas(lambdas),
        max=float(lambdas[0]),
        numerical_rank=rank,
    )


# ---------------------------------------------------------------------------
# rapid-decay certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RdCertificate:
    """Sampled check that lambda_1 never exceeds the exact bound [k+1]/theta."""

    triple: AdmissibleTriple
    samples: int
    max_observed: float
    bound_exact: float
    bound_coarse: float
    violated: bool


def rd_certificate(
    p: QParams,
    t: AdmissibleTriple,
    samples: int = 200,
    seed: int = 0,
    max_dim: int = DEFAULT_DIM_CAP,
) -> RdCertificate:
    """Push Haar-random unit vectors of H_k through alpha and record lambda_1.

    Sampling is a falsification attempt on the closed-form bound, not a
    proof; `violated` reports whether any sample beat bound_exact + 1e-8.
    """
    iso = isometry(p, t, max_dim=max_dim)
    d = iso.reduced.shape[1]
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = rng.standard_normal((d, samples))
    x /= np.linalg.norm(x, axis=0)
    images = iso.reduced @ x  # ambient vectors, one per sample
    nl = p.n**t.l
    stack = images.T.reshape(samples, nl, -1)
    sigma = np.linalg.svd(stack, compute_uv=False)
    max_observed = float((sigma[:, 0] ** 2).max())
    exact, coarse = rd_bound(p, t)
    return RdCertificate(
        triple=t,
        samples=samples,
        max_observed=max_observed,
        bound_exact=exact,
        bound_coarse=coarse,
        violated=bool(max_observed > exact + 1e-8),
    )


# ---------------------------------------------------------------------------
# maximal-Schmidt optimizer
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaxSchmidtResult:
    """Best value of sup |<alpha(xi)|eta (x) zeta>| found over all restarts."""

    value: float
    xi: TensorVector
    eta: TensorVector
    zeta: TensorVector
    converged: bool
    sweeps: int


def _one_restart(
    reduced: np.ndarray,
    nl: int,
    nm: int,
    rng: np.random.Generator,
    tol: float,
    max_iters: int,
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, bool, int]:
    d = reduced.shape[1]

    def normalized(vec: np.ndarray) -> np.ndarray:
        nrm = np.linalg.norm(vec)
        if nrm < 1e-300:  # degenerate contraction; restart direction
            vec = rng.standard_normal(vec.shape)
            nrm = np.linalg.norm(vec)
        return vec / nrm

    xi = normalized(rng.standard_normal(d))
    eta = normalized(rng.standard_normal(nl))
    zeta = normalized(rng.standard_normal(nm))
    prev = -1.0
    outer = np.empty((nl, nm))
    for sweep in range(1, max_iters + 1):
        mat = (reduced @ xi).reshape(nl, nm)
        eta = normalized(mat @ zeta)
        zeta = normalized(mat.T @ eta)
        np.outer(eta, zeta, out=outer)
        raw = reduced.T @ outer.reshape(-1)
        obj = float(np.linalg.norm(raw))
        xi = normalized(raw)
        if abs(obj - prev) <= tol * max(1.0, obj):
            return obj, xi, eta, zeta, True, sweep
        prev = obj
    return prev, xi, eta, zeta, False, max_iters


def max_schmidt_optimizer(
    p: QParams,
    t: AdmissibleTriple,
    restarts: int = 20,
    tol: float = 1e-12,
    seed: int = 0,
    max_iters: int = 1000,
    max_dim: int = DEFAULT_DIM_CAP,
    workers: int | None = None,
) -> MaxSchmidtResult:
    """Trilinear alternating power iteration for sup lambda_1^{1/2}.

    Each sweep replaces one argument of <alpha(xi)|eta (x) zeta> by the
    normalized contraction of the other two, so the objective is
    monotone per restart.  Restarts draw independent Gaussian starts
    from a split seed and run in a thread pool; the reduction keeps the
    best value, ties broken by lowest restart index, so the result does
    not depend on completion order.
    """
    if restarts < 1:
        raise ValueError("need at least one restart")
    iso = isometry(p, t, max_dim=max_dim)
    nl, nm = p.n**t.l, p.n**t.m
    seqs = np.random.SeedSequence(seed).spawn(restarts)

    def task(idx: int):
        rng = np.random.default_rng(seqs[idx])
        return (idx, *_one_restart(iso.reduced, nl, nm, rng, tol, max_iters))

    if workers is None:
        workers = min(restarts, os.cpu_count() or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(task, range(restarts)))
    else:
        results = [task(i) for i in range(restarts)]
    idx, value, xi_red, eta, zeta, converged, sweeps = max(
        results, key=lambda row: (row[1], -row[0])
    )
    xi_ambient = iso.basis.columns @ xi_red
    return MaxSchmidtResult(
        value=value,
        xi=TensorVector(TensorShape(p.n, t.k), xi_ambient),
        eta=TensorVector(TensorShape(p.n, t.l), eta),
        zeta=TensorVector(TensorShape(p.n, t.m), zeta),
        converged=converged,
        sweeps=sweeps,
    )


# ---------------------------------------------------------------------------
# saturation witness family
# ---------------------------------------------------------------------------

def _alternating_letters(count: int, first: int = 1, second: int = 2) -> list[int]:
    return [first if s % 2 == 0 else second for s in range(count)]


@dataclass(frozen=True)
class SaturationWitness:
    """The alternating-word input xi and the orthonormal output families.

    eta_family[i] (x) zeta_family[i] are the product vectors whose span
    realizes the flat top of the Schmidt spectrum of alpha(xi).
    """

    triple: AdmissibleTriple
    xi: TensorVector
    family_size: int
    eta_family: tuple[TensorVector, ...]
    zeta_family: tuple[TensorVector, ...]


def saturation_witness(
    p: QParams, t: AdmissibleTriple, max_dim: int = DEFAULT_DIM_CAP
) -> SaturationWitness:
    """Build xi = eta_k(1,2) and the index family A of Prop-style witnesses.

    A = {i: [r] -> [N] with i(1) >= 3 and i(s) != i(s+1)}; each index
    yields eta_i = eta_0 (x) e_{i(1)} ... e_{i(r)} and the mirrored
    zeta_i, where eta_0/zeta_0 are the first l-r / last m-r letters of
    xi.  Every family member must be fixed by its Jones-Wenzl
    projection; a failed fix is a loud error, so a wrong reading of the
    alternation condition cannot slip through.
    """
    if t.r < 1:
        raise ValueError(f"triple {t} is highest weight: no witness family (r = 0)")
    if p.n < 3:
        raise ValueError("witness family needs rank >= 3 (letter i(1) >= 3)")
    n, k, l, m, r = p.n, t.k, t.l, t.m, t.r
    word = _alternating_letters(k)
    xi = basis_vector(TensorShape(n, k), word, max_dim=max_dim)
    eta0 = word[: l - r]
    zeta0 = word[l - r :]
    indices = [
        idx
        for idx in itertools.product(range(1, n + 1), repeat=r)
        if idx[0] >= 3 and all(idx[s] != idx[s + 1] for s in range(r - 1))
    ]
    want = (n - 2) * (n - 1) ** (r - 1)
    if len(indices) != want:
        raise InvariantViolation(
            f"witness family size {len(indices)} != (N-2)(N-1)^(r-1) = {want}"
        )
    jw_l = jw_projection(p, l, max_dim=max_dim)
    jw_m = jw_projection(p, m, max_dim=max_dim)
    etas, zetas = [], []
    for idx in indices:
        eta = basis_vector(TensorShape(n, l), eta0 + list(idx), max_dim=max_dim)
        zeta = basis_vector(TensorShape(n, m), list(idx[::-1]) + zeta0, max_dim=max_dim)
        if jw_fixes(jw_l, eta) > WITNESS_FIX_TOL or jw_fixes(jw_m, zeta) > WITNESS_FIX_TOL:
            raise InvariantViolation(
                f"witness vector for index {idx} is not fixed by its projection"
            )
        etas.append(eta)
        zetas.append(zeta)
    return SaturationWitness(t, xi, len(indices), tuple(etas), tuple(zetas))


def _lambda_top_expected(p: QParams, t: AdmissibleTriple) -> float:
    log_dim = q_factorial_log(p, t.k + 1) - q_factorial_log(p, t.k)
    return math.exp(log_dim - theta_net_log(p, t))


def _image_of(iso: EquivariantIsometry, v: TensorVector) -> TensorVector:
    coords = iso.basis.columns.T @ v.data
    t = iso.triple
    return TensorVector(
        TensorShape(iso.params.n, t.l + t.m), iso.reduced @ coords
    )


@dataclass(frozen=True)
class SaturationReport:
    """Observed Schmidt plateau of alpha(eta_k(1,2)) against the closed form."""

    triple: AdmissibleTriple
    family_size: int
    lambda_expected: float
    top_values: np.ndarray
    max_rel_err: float
    plateau_ok: bool
    boundary_separated: bool
    observed_plateau_size: int
    mass: float


def verify_saturation(
    p: QParams, t: AdmissibleTriple, max_dim: int = DEFAULT_DIM_CAP
) -> SaturationReport:
    """Check that the top |A| Schmidt values of alpha(xi) all equal [k+1]/theta.

    `boundary_separated` records whether the plateau stops exactly at
    |A|; a larger observed plateau is reported, never asserted away.
    `mass` is |A| [k+1]/theta, the weight the plateau carries.
    """
    wit = saturation_witness(p, t, max_dim=max_dim)
    iso = isometry(p, t, max_dim=max_dim)
    spec = schmidt_spectrum(_image_of(iso, wit.xi), t.l)
    lam = spec.coefficients
    expected = _lambda_top_expected(p, t)
    d = wit.family_size
    top = lam[:d]
    max_rel = float(np.abs(top - expected).max() / expected)
    observed = int(np.count_nonzero(lam >= lam[0] - PLATEAU_GAP))
    separated = len(lam) <= d or bool(lam[d] < lam[0] - PLATEAU_GAP)
    return SaturationReport(
        triple=t,
        family_size=d,
        lambda_expected=expected,
        top_values=top,
        max_rel_err=max_rel,
        plateau_ok=bool(max_rel <= PLATEAU_RTOL),
        boundary_separated=separated,
        observed_plateau_size=observed,
        mass=d * expected,
    )


@dataclass(frozen=True)
class HigherRankReport:
    """||alpha^*(sum eta_i (x) zeta_i)|| against its closed form and floor."""

    triple: AdmissibleTriple
    family_size: int
    lhs: float
    rhs_exact: float
    rhs_floor: float
    exact_ok: bool
    floor_ok: bool


def higher_rank_value(
    p: QParams, t: AdmissibleTriple, max_dim: int = DEFAULT_DIM_CAP
) -> HigherRankReport:
    """Evaluate ||alpha^*(sum_{i in A} eta_i (x) zeta_i)|| numerically.

    The exact value is |A| ([k+1]/theta)^{1/2}.  The floor
    |A| q^{(l+m-k)/4} is reported with a flag only: the attainable floor
    carries an extra (1-q^2)^{1/2}, and Bell-type triples sit below the
    unadjusted one.
    """
    wit = saturation_witness(p, t, max_dim=max_dim)
    iso = isometry(p, t, max_dim=max_dim)
    total = np.zeros(p.n ** (t.l + t.m))
    for eta, zeta in zip(wit.eta_family, wit.zeta_family):
        total += np.kron(eta.data, zeta.data)
    lhs = float(np.linalg.norm(iso.reduced.T @ total))
    rhs_exact = wit.family_size * math.sqrt(_lambda_top_expected(p, t))
    rhs_floor = wit.family_size * p.q ** ((t.l + t.m - t.k) / 4.0)
    return HigherRankReport(
        triple=t,
        family_size=wit.family_size,
        lhs=lhs,
        rhs_exact=rhs_exact,
        rhs_floor=rhs_floor,
        exact_ok=bool(abs(lhs - rhs_exact) <= 1e-8 * rhs_exact),
        floor_ok=bool(lhs >= rhs_floor - 1e-12),
    )


# ---------------------------------------------------------------------------
# highest-weight separability
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparabilityWitness:
    """A rank-1 product vector inside the highest-weight subspace."""

    vector: TensorVector
    schmidt_rank: int
    residual: float


def separability_witness_highest_weight(
    p: QParams,
    l: int,
    m: int,
    i: int,
    j: int,
    max_dim: int = DEFAULT_DIM_CAP,
) -> SeparabilityWitness:
    """eta_l(i,j) (x) eta_m(i',j') with the alternation continued across
    the junction, which lands the product vector inside alpha(H_{l+m}).

    residual = ||alpha alpha^* v - v||; rank-1 separability plus a tiny
    residual shows the embedded subspace touches the product-state set.
    """
    if i == j:
        raise ValueError("separability witness needs two distinct letters")
    left = basis_vector(TensorShape(p.n, l), _alternating_letters(l, i, j), max_dim=max_dim)
    if l % 2 == 0:
        right_letters = _alternating_letters(m, i, j)
    else:
        right_letters = _alternating_letters(m, j, i)
    right = basis_vector(TensorShape(p.n, m), right_letters, max_dim=max_dim)
    vec = TensorVector(TensorShape(p.n, l + m), np.kron(left.data, right.data))
    iso = isometry(p, AdmissibleTriple(l + m, l, m), max_dim=max_dim)
    residual = float(
        np.linalg.norm(iso.reduced @ (iso.reduced.T @ vec.data) - vec.data)
    )
    rank = schmidt_spectrum(vec, l).numerical_rank
    return SeparabilityWitness(vector=vec, schmidt_rank=rank, residual=residual)


# ---------------------------------------------------------------------------
# entropy / dimension trade-off surrogate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EntropyDimTradeoff:
    """Lower-bound surrogate: entropy floor plus mu-weighted dimension gap.

    entropy_lower = log(theta/[k+1]) bounds every output entropy from
    below; dim_term = log [k+1] - log([l+1][m+1]) is never positive.
    This is a reporting quantity, not the true regularized trade-off.
    """

    mu: float
    entropy_lower: float
    dim_term: float
    value: float


def entropy_dim_tradeoff(p: QParams, t: AdmissibleTriple, mu: float) -> EntropyDimTradeoff:
    if not 0.0 < mu < 1.0:
        raise ValueError(f"mu must be in (0, 1), got {mu}")
    def log_dim(level: int) -> float:
        return q_factorial_log(p, level + 1) - q_factorial_log(p, level)

    entropy_lower = theta_net_log(p, t) - log_dim(t.k)
    dim_term = log_dim(t.k) - log_dim(t.l) - log_dim(t.m)
    return EntropyDimTradeoff(
        mu=mu,
        entropy_lower=entropy_lower,
        dim_term=dim_term,
        value=entropy_lower + mu * dim_term,
    )
