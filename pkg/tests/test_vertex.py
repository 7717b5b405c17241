"""Tests for trivalent vertices and equivariant isometries.

The central oracle equivalence: the brute-force Frobenius trace of the
dense vertex must reproduce the closed-form theta-net.
"""

from __future__ import annotations

import numpy as np
import pytest

import wenzl_lab.vertex as vxmod
from wenzl_lab.errors import DimensionCapError, InvariantViolation
from wenzl_lab.jones_wenzl import jw_projection, onb_of_irrep
from wenzl_lab.jones_wenzl import clear_caches as clear_jw
from wenzl_lab.qnum import (
    AdmissibleTriple,
    admissible_triples,
    q_int,
    quantum_parameter,
    theta_net,
)
from wenzl_lab.tensor_core import cup_vector
from wenzl_lab.vertex import (
    clear_caches,
    isometry,
    theta_by_trace,
    three_vertex,
    verify_equivariance_proxy,
)

THETA_RTOL = 1e-7
ISO_TOL = 1e-9


@pytest.fixture(autouse=True)
def _fresh_caches():
    clear_caches()
    yield
    clear_caches()
    clear_jw()


# ---------------------------------------------------------------------------
# vertex construction and the theta oracle
# ---------------------------------------------------------------------------

def test_bell_vertex_is_cup():
    p = quantum_parameter(3)
    v = three_vertex(p, AdmissibleTriple(0, 1, 1))
    np.testing.assert_allclose(
        v.op.data[:, 0], cup_vector(p, 1).data, atol=1e-12
    )
    assert theta_by_trace(v) == pytest.approx(3.0, rel=1e-12)


def test_highest_weight_vertex_is_projection():
    p = quantum_parameter(3)
    v = three_vertex(p, AdmissibleTriple(2, 1, 1))
    np.testing.assert_allclose(v.op.data, jw_projection(p, 2).op.data, atol=1e-10)
    assert theta_by_trace(v) == pytest.approx(8.0, rel=THETA_RTOL)


@pytest.mark.parametrize(
    "n,k,l,m,want",
    [
        (3, 1, 1, 2, 8.0),
        (3, 2, 2, 2, 56.0 / 3.0),
        (4, 2, 2, 2, 52.5),
        (3, 0, 2, 2, 8.0),
    ],
)
def test_theta_by_trace_frozen_values(n, k, l, m, want):
    p = quantum_parameter(n)
    v = three_vertex(p, AdmissibleTriple(k, l, m))
    assert theta_by_trace(v) == pytest.approx(want, rel=THETA_RTOL)


@pytest.mark.parametrize("n", [3, 4])
def test_theta_trace_matches_closed_form_sweep(n):
    p = quantum_parameter(n)
    for l in range(0, 4):
        for m in range(0, 4):
            if n ** (l + m) > 4096 or n ** (l + m) > 3**6:
                continue  # keep the unit sweep fast; acceptance covers the rest
            for t in admissible_triples(l, m):
                got = theta_by_trace(three_vertex(p, t))
                assert got == pytest.approx(theta_net(p, t), rel=THETA_RTOL), t


def test_vertex_norm_bounded_by_qint():
    # ||A||^2 <= [r+1]_q
    for n, k, l, m in [(3, 0, 1, 1), (3, 1, 1, 2), (3, 2, 2, 2), (4, 0, 2, 2)]:
        p = quantum_parameter(n)
        t = AdmissibleTriple(k, l, m)
        top = np.linalg.svd(three_vertex(p, t).op.data, compute_uv=False)[0]
        assert top**2 <= q_int(p, t.r + 1) * (1 + 1e-10)


def test_vertex_cap():
    p = quantum_parameter(3)
    with pytest.raises(DimensionCapError):
        three_vertex(p, AdmissibleTriple(0, 1, 1), max_dim=8)


# ---------------------------------------------------------------------------
# isometries
# ---------------------------------------------------------------------------

def test_bell_isometry_is_normalized_cup():
    p = quantum_parameter(3)
    iso = isometry(p, AdmissibleTriple(0, 1, 1))
    assert iso.reduced.shape == (9, 1)
    np.testing.assert_allclose(
        np.abs(iso.reduced[:, 0]),
        cup_vector(p, 1).data / np.sqrt(3.0),
        atol=1e-12,
    )


def test_highest_weight_isometry_has_unit_scale():
    p = quantum_parameter(3)
    iso = isometry(p, AdmissibleTriple(2, 1, 1))
    assert iso.scale == pytest.approx(1.0, rel=1e-9)
    np.testing.assert_allclose(
        iso.ambient.data, jw_projection(p, 2).op.data, atol=1e-9
    )
    # on basis coordinates the inclusion is exactly the basis itself
    np.testing.assert_allclose(iso.reduced, onb_of_irrep(p, 2).columns, atol=1e-9)


@pytest.mark.parametrize(
    "n,k,l,m", [(3, 0, 1, 1), (3, 1, 1, 2), (3, 2, 2, 2), (3, 3, 2, 3), (4, 2, 1, 3)]
)
def test_isometry_contract(n, k, l, m):
    p = quantum_parameter(n)
    iso = isometry(p, AdmissibleTriple(k, l, m))
    gram = iso.reduced.T @ iso.reduced
    assert np.abs(gram - np.eye(gram.shape[0])).max() <= ISO_TOL


def test_isometry_injective():
    p = quantum_parameter(3)
    iso = isometry(p, AdmissibleTriple(1, 1, 2))
    smin = np.linalg.svd(iso.reduced, compute_uv=False)[-1]
    assert smin >= 1 - 1e-8


def test_isometry_cached():
    p = quantum_parameter(3)
    t = AdmissibleTriple(1, 1, 2)
    assert isometry(p, t) is isometry(p, t)


def test_ambient_shape_and_factorization():
    p = quantum_parameter(3)
    iso = isometry(p, AdmissibleTriple(1, 1, 2))
    amb = iso.ambient
    assert amb.data.shape == (27, 3)
    np.testing.assert_allclose(
        amb.data, iso.reduced @ iso.basis.columns.T, atol=1e-12
    )


def test_theta_disagreement_is_hard_error(monkeypatch):
    p = quantum_parameter(3)
    monkeypatch.setattr(vxmod, "theta_net_log", lambda *_: 0.0)
    with pytest.raises(InvariantViolation):
        isometry(p, AdmissibleTriple(1, 1, 2))


# ---------------------------------------------------------------------------
# equivariance proxy
# ---------------------------------------------------------------------------

def test_proxy_exact_for_bell():
    p = quantum_parameter(3)
    assert verify_equivariance_proxy(isometry(p, AdmissibleTriple(0, 1, 1))) <= 1e-12


@pytest.mark.parametrize("k,l,m", [(1, 1, 2), (3, 2, 3), (2, 2, 2)])
def test_proxy_small_residual(k, l, m):
    p = quantum_parameter(3)
    assert verify_equivariance_proxy(isometry(p, AdmissibleTriple(k, l, m))) <= 1e-9
