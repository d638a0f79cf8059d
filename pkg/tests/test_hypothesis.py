"""Composite hypothesis testing: exact Neyman-Pearson and Stein exponents."""

import numpy as np
import pytest

from rescomp.core import (
    HermitianOperator,
    SubsystemShape,
    basis_state,
    maximally_coherent_state,
    maximally_mixed_state,
    random_density_matrix,
    tensor_power,
)
from rescomp.errors import DimensionCap
from rescomp.freesets import GibbsSingleton, IncoherentFamily, MaxMixedSingleton
from rescomp.hypothesis import beta_n, beta_singleton, stein_exponent_sequence

INC2 = IncoherentFamily(SubsystemShape((2,)))


def test_beta_singleton_identical_states():
    # [TRIVIAL: symmetry] rho = omega -> beta = 1 - eps
    rho = random_density_matrix((3,), seed=2)
    for eps in (0.0, 0.05, 0.3):
        res = beta_singleton(rho, rho, eps)
        assert res.beta == pytest.approx(1.0 - eps, abs=1e-9)
        assert res.type1 <= eps + 1e-9


def test_beta_singleton_orthogonal_states():
    # perfectly distinguishable: beta = 0 at any eps
    res = beta_singleton(basis_state((2,), 0), basis_state((2,), 1), 0.01)
    assert res.beta == pytest.approx(0.0, abs=1e-12)
    assert res.type1 <= 0.01 + 1e-12


def test_beta_singleton_classical_oracle():
    # [DERIVED] rho = |0><0|, omega = I/2, eps = 0: optimal test is |0><0|,
    # beta = 1/2
    res = beta_singleton(basis_state((2,), 0), maximally_mixed_state((2,)), 0.0)
    assert res.beta == pytest.approx(0.5, abs=1e-9)
    # at eps > 0 randomized tests reduce beta to (1 - eps)/2
    res = beta_singleton(basis_state((2,), 0), maximally_mixed_state((2,)), 0.2)
    assert res.beta == pytest.approx(0.4, abs=1e-9)


def test_beta_singleton_test_feasibility():
    rng = np.random.default_rng(23)
    for _ in range(5):
        rho = random_density_matrix((3,), seed=int(rng.integers(1 << 30)))
        omega = random_density_matrix((3,), seed=int(rng.integers(1 << 30)))
        res = beta_singleton(rho, omega, 0.1)
        vals = np.linalg.eigvalsh(res.test.matrix)
        assert vals.min() >= -1e-9 and vals.max() <= 1.0 + 1e-9
        assert res.type1 <= 0.1 + 1e-9
        # consistency: reported beta equals the test's acceptance on omega
        acc = float(np.real(np.trace(res.test.matrix @ omega.matrix)))
        assert acc == pytest.approx(res.beta, abs=1e-9)


def test_beta_n_incoherent_exact_value():
    # [DERIVED] for |+><+|^n vs Incoherent: beta_n = (1 - eps) / 2^n
    plus = maximally_coherent_state(2)
    eps = 0.05
    for n in (1, 2, 3):
        res = beta_n(plus, INC2, n, eps)
        assert res.beta == pytest.approx((1 - eps) / 2**n, rel=1e-4)
        # worst_free certifies: free state achieving the reported beta
        assert INC2.n_copy(n).contains(res.worst_free, tol=1e-6).is_member
        acc = float(np.real(np.trace(res.test.matrix @ res.worst_free.matrix)))
        assert acc <= res.beta + 1e-6


def test_beta_n_monotone_in_eps():
    plus = maximally_coherent_state(2)
    betas = [beta_n(plus, INC2, 2, eps).beta for eps in (0.01, 0.1, 0.3)]
    assert betas[0] >= betas[1] >= betas[2]


def test_beta_n_dimension_cap():
    with pytest.raises(DimensionCap):
        beta_n(maximally_coherent_state(2), INC2, 11, 0.05)


def test_stein_exponents_gibbs_oracle():
    # [DERIVED] gamma = diag(0.7, 0.3), rho = |0><0|:
    # beta_n = (1-eps) 0.7^n, exponent = S(rho||gamma) + log2(1/(1-eps))/n
    ham = HermitianOperator(SubsystemShape((2,)), np.diag([0.0, 1.0]).astype(complex))
    fam = GibbsSingleton(SubsystemShape((2,)), ham, float(np.log(0.7 / 0.3)))
    rho = basis_state((2,), 0)
    eps = 0.05
    seq = stein_exponent_sequence(rho, fam, 5, eps)
    target = -float(np.log2(0.7))
    offset = -float(np.log2(1 - eps))
    for n, beta, exponent in seq.entries:
        assert beta == pytest.approx((1 - eps) * 0.7**n, rel=1e-9)
        assert exponent == pytest.approx(target + offset / n, abs=1e-9)
    assert seq.e_infinity_estimate == pytest.approx(target, abs=1e-9)


def test_stein_exponents_monotone_composite():
    # warm starts guarantee beta_{n+1} <= beta_n / free-per-copy factor:
    # exponents decrease monotonically toward E^infinity for |+> vs Incoherent
    plus = maximally_coherent_state(2)
    seq = stein_exponent_sequence(plus, INC2, 4, 0.05)
    exps = [x for _, x in seq.exponents()]
    for a, b in zip(exps, exps[1:]):
        assert b <= a + 1e-9
    # exponent stays above the asymptotic rate E^infinity = 1
    assert all(x >= 1.0 - 1e-6 for x in exps)
