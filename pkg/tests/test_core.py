"""State primitives: entropies, distances, tensor algebra, gradients."""

import numpy as np
import pytest

from rescomp.core import (
    DensityMatrix,
    SubsystemShape,
    basis_state,
    bell_state,
    density_matrix,
    log_frechet_gradient,
    maximally_coherent_state,
    maximally_mixed_state,
    partial_trace,
    permute_subsystems,
    pure_state,
    quantum_relative_entropy,
    random_density_matrix,
    shannon_entropy,
    tensor_power,
    tensor_product,
    trace_distance,
    von_neumann_entropy,
)
from rescomp.errors import ShapeMismatch


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        density_matrix(np.array([[0.9, 0.0], [0.0, 0.0]]), (2,))  # trace != 1
    with pytest.raises(ValueError):
        density_matrix(np.array([[1.5, 0.0], [0.0, -0.5]]), (2,))  # not PSD
    rho = density_matrix(np.eye(2) / 2, (2,))
    assert rho.dim == 2
    assert rho.shape == SubsystemShape((2,))


def test_entropy_oracles():
    # [TRIVIAL] pure states have zero entropy; I/d has log2 d
    assert von_neumann_entropy(basis_state((2,), 0)) == pytest.approx(0.0, abs=1e-12)
    assert von_neumann_entropy(maximally_mixed_state((4,))) == pytest.approx(2.0)
    assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0)
    # [DERIVED] binary entropy h(0.3) = 0.8812908992306927
    assert shannon_entropy([0.3, 0.7]) == pytest.approx(0.8812908992306927, abs=1e-12)


def test_relative_entropy_oracles():
    plus = maximally_coherent_state(2)
    mixed = maximally_mixed_state((2,))
    # [DERIVED] S(|+><+| || I/2) = log2(2) - 0 = 1 bit
    assert quantum_relative_entropy(plus, mixed) == pytest.approx(1.0, abs=1e-10)
    assert quantum_relative_entropy(plus, plus) == pytest.approx(0.0, abs=1e-10)
    # support violation: |0><0| vs |1><1|
    z0, z1 = basis_state((2,), 0), basis_state((2,), 1)
    assert quantum_relative_entropy(z0, z1) == np.inf


def test_relative_entropy_vs_classical():
    # diagonal states reduce to KL divergence in bits
    p = np.array([0.6, 0.3, 0.1])
    q = np.array([0.2, 0.5, 0.3])
    rho = density_matrix(np.diag(p), (3,))
    sigma = density_matrix(np.diag(q), (3,))
    kl = float(np.sum(p * np.log2(p / q)))
    assert quantum_relative_entropy(rho, sigma) == pytest.approx(kl, abs=1e-10)


def test_bell_state_marginals():
    phi = bell_state()
    for keep in ([0], [1]):
        marg = partial_trace(phi, keep)
        np.testing.assert_allclose(marg.matrix, np.eye(2) / 2, atol=1e-12)
    assert von_neumann_entropy(phi) == pytest.approx(0.0, abs=1e-10)


def test_tensor_and_permute_consistency():
    rng = np.random.default_rng(5)
    a = random_density_matrix((2,), seed=11)
    b = random_density_matrix((3,), seed=12)
    ab = tensor_product(a, b)
    assert ab.shape.dims == (2, 3)
    ba = permute_subsystems(ab, (1, 0))
    np.testing.assert_allclose(ba.matrix, np.kron(b.matrix, a.matrix), atol=1e-12)
    np.testing.assert_allclose(
        partial_trace(ab, [0]).matrix, a.matrix, atol=1e-12
    )
    # entropy is additive across tensor powers
    n3 = tensor_power(a, 3)
    assert von_neumann_entropy(n3) == pytest.approx(3 * von_neumann_entropy(a), abs=1e-9)
    del rng


def test_trace_distance_oracles():
    z0, z1 = basis_state((2,), 0), basis_state((2,), 1)
    assert trace_distance(z0, z1) == pytest.approx(1.0, abs=1e-12)
    assert trace_distance(z0, z0) == pytest.approx(0.0, abs=1e-12)
    # [DERIVED] |0><0| vs I/2: eigenvalues of difference are +-1/2 -> distance 1/2
    assert trace_distance(z0, maximally_mixed_state((2,))) == pytest.approx(0.5)


def test_log_frechet_gradient_matches_finite_difference():
    rng = np.random.default_rng(7)
    for _ in range(5):
        sigma = random_density_matrix((3,), seed=int(rng.integers(1 << 30))).matrix
        rho = random_density_matrix((3,), seed=int(rng.integers(1 << 30))).matrix
        h = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h = (h + h.conj().T) / 2
        grad = log_frechet_gradient(sigma, rho)
        from scipy.linalg import logm

        t = 1e-6
        f = lambda s: float(np.real(np.trace(rho @ logm(s))))
        num = (f(sigma + t * h) - f(sigma - t * h)) / (2 * t)
        ana = float(np.real(np.trace(grad @ h)))
        assert ana == pytest.approx(num, abs=1e-5)


def test_random_density_matrix_properties():
    rho = random_density_matrix((2, 2), rank=2, seed=3)
    vals = np.linalg.eigvalsh(rho.matrix)
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert vals.min() >= -1e-12
    assert np.sum(vals > 1e-10) == 2
    # deterministic in the seed
    again = random_density_matrix((2, 2), rank=2, seed=3)
    np.testing.assert_allclose(rho.matrix, again.matrix, atol=0)


def test_shape_mismatch_raises():
    a = random_density_matrix((2,), seed=1)
    b = random_density_matrix((3,), seed=2)
    with pytest.raises(ShapeMismatch):
        trace_distance(a, b)


def test_pure_state_normalization():
    psi = pure_state(np.array([1.0, 1.0]), (2,))
    np.testing.assert_allclose(
        psi.matrix, maximally_coherent_state(2).matrix, atol=1e-12
    )
