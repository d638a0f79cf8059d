"""Convex projection primitives and the small conic solvers."""

import numpy as np
import pytest

from rescomp.core import random_density_matrix
from rescomp.projections import (
    admm_linear_two_sets,
    dykstra,
    l1_ball_projection,
    min_trace_diagonal_completion,
    proj_density,
    proj_halfspace_trace,
    proj_psd,
    proj_psd_trace,
    proj_spectral_box,
    proj_trace_norm_ball,
    simplex_projection,
    simplex_qp,
)


def test_simplex_projection_oracles():
    np.testing.assert_allclose(simplex_projection(np.array([0.2, 0.3, 0.5])),
                               [0.2, 0.3, 0.5], atol=1e-12)
    # [DERIVED] proj of (1,1) onto the simplex is (0.5, 0.5)
    np.testing.assert_allclose(simplex_projection(np.array([1.0, 1.0])),
                               [0.5, 0.5], atol=1e-12)
    out = simplex_projection(np.array([-5.0, 0.0, 10.0]))
    np.testing.assert_allclose(out, [0.0, 0.0, 1.0], atol=1e-12)


def test_simplex_projection_is_nearest_point():
    rng = np.random.default_rng(2)
    for _ in range(20):
        v = rng.normal(size=6)
        p = simplex_projection(v)
        assert p.min() >= -1e-12 and p.sum() == pytest.approx(1.0, abs=1e-10)
        # any random simplex point is no closer
        q = rng.dirichlet(np.ones(6))
        assert np.linalg.norm(v - p) <= np.linalg.norm(v - q) + 1e-10


def test_l1_ball_projection():
    v = np.array([3.0, -1.0])
    p = l1_ball_projection(v, 1.0)
    assert np.abs(p).sum() == pytest.approx(1.0, abs=1e-10)
    np.testing.assert_allclose(l1_ball_projection(np.array([0.2, 0.1]), 1.0),
                               [0.2, 0.1], atol=1e-12)


def test_psd_and_density_projections():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    m = (m + m.conj().T) / 2
    p = proj_psd(m)
    assert np.linalg.eigvalsh(p).min() >= -1e-12
    pt = proj_psd_trace(m, 1.0)
    assert np.trace(pt).real == pytest.approx(1.0, abs=1e-10)
    assert np.linalg.eigvalsh(pt).min() >= -1e-12
    d = proj_density(m)
    np.testing.assert_allclose(d, pt, atol=1e-10)


def test_spectral_box_and_halfspace():
    m = np.diag([-0.5, 0.3, 1.7]).astype(complex)
    np.testing.assert_allclose(proj_spectral_box(m, 0.0, 1.0),
                               np.diag([0.0, 0.3, 1.0]), atol=1e-12)
    normal = np.eye(2, dtype=complex)
    x = np.zeros((2, 2), dtype=complex)
    out = proj_halfspace_trace(x, normal, 1.0)  # enforce tr(X) >= 1
    assert np.trace(out).real == pytest.approx(1.0, abs=1e-10)
    inside = np.eye(2, dtype=complex)
    np.testing.assert_allclose(proj_halfspace_trace(inside, normal, 1.0), inside)


def test_trace_norm_ball_projection():
    center = np.zeros((2, 2), dtype=complex)
    far = np.diag([2.0, -2.0]).astype(complex)
    out = proj_trace_norm_ball(far, center, 1.0)
    vals = np.linalg.eigvalsh(out)
    assert np.abs(vals).sum() == pytest.approx(1.0, abs=1e-8)


def test_dykstra_finds_intersection_point():
    # PSD cone intersect {tr = 1} from a random start
    rng = np.random.default_rng(6)
    m = rng.normal(size=(3, 3))
    m = (m + m.T) / 2 + 0j
    res = dykstra([proj_psd, lambda x: proj_psd_trace(x, 1.0)], m)
    assert res.converged
    assert np.trace(res.point).real == pytest.approx(1.0, abs=1e-6)
    assert np.linalg.eigvalsh(res.point).min() >= -1e-6


def test_simplex_qp_matches_bruteforce():
    # min (1/2) w'Gw + c'w over the simplex, G PSD: check against a dense grid
    g = np.array([[2.0, 0.5], [0.5, 1.0]])
    c = np.array([-1.0, 0.0])
    w = simplex_qp(g, c)
    grid = np.linspace(0, 1, 2001)
    vals = 0.5 * (g[0, 0] * grid**2 + 2 * g[0, 1] * grid * (1 - grid)
                  + g[1, 1] * (1 - grid) ** 2) + c[0] * grid + c[1] * (1 - grid)
    best = grid[np.argmin(vals)]
    assert w[0] == pytest.approx(best, abs=1e-3)


def test_min_trace_diagonal_completion_oracle():
    # [DERIVED] for offdiag r on a qubit the minimal trace is 2|r|
    r = 0.5
    off = np.array([[0.0, r], [r, 0.0]], dtype=complex)
    a, value, gap = min_trace_diagonal_completion(off)
    assert value == pytest.approx(2 * r, abs=1e-6)
    assert np.linalg.eigvalsh(np.diag(a) + off).min() >= -1e-9
    assert gap < 1e-5


def test_admm_linear_two_sets_small_sdp():
    # min tr(X) over PSD X with tr(X) >= 1: optimum 1
    g = np.eye(2, dtype=complex)
    normal = np.eye(2, dtype=complex)
    sol, resid, _ = admm_linear_two_sets(
        g, proj_psd, lambda x: proj_halfspace_trace(x, normal, 1.0), 2
    )
    assert np.trace(sol).real == pytest.approx(1.0, abs=1e-5)
    assert resid < 1e-6


def test_projections_are_idempotent():
    rng = np.random.default_rng(8)
    m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = (m + m.conj().T) / 2
    for proj in (proj_psd, proj_density, lambda x: proj_spectral_box(x, 0.0, 1.0)):
        once = proj(m)
        np.testing.assert_allclose(proj(once), once, atol=1e-10)
