"""Dense Hermitian linear algebra over multipartite finite-dimensional systems.

States, observables and two-outcome tests live on a :class:`SubsystemShape`
describing the tensor factorization of the underlying space.  All entropic
quantities are in bits (log base 2).  Everything here is a pure function of
its inputs; the value types are immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyKeepSet,
    InvalidPermutation,
    InvalidRank,
    ShapeMismatch,
)

# Numerical tolerances for the type invariants.
HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
TEST_OPERATOR_TOL = 1e-10

# Eigenvalues of sigma below this are treated as zero when deciding the
# infinite branch of the relative entropy.
SUPPORT_THRESHOLD = 1e-12

# Only dense matrices up to this total dimension are supported (n-copy
# experiments cap at 2**10).
MAX_TOTAL_DIM = 1024

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class SubsystemShape:
    """Ordered tensor factorization (m_1, ..., m_s) of a finite-dim space."""

    dims: tuple[int, ...]

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if len(dims) < 1 or any(d < 1 for d in dims):
            raise ValueError(f"invalid subsystem dims {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def num_factors(self) -> int:
        return len(self.dims)

    def concat(self, other: "SubsystemShape") -> "SubsystemShape":
        return SubsystemShape(self.dims + other.dims)

    def n_copy(self, n: int) -> "SubsystemShape":
        """Shape of n spatially separated copies: the dims concatenated n times."""
        if n < 1:
            raise ValueError("copy count must be >= 1")
        return SubsystemShape(self.dims * n)

    def __str__(self) -> str:
        return "x".join(str(d) for d in self.dims)


def _as_hermitian(matrix, tol: float) -> np.ndarray:
    mat = np.asarray(matrix, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    dev = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if dev > tol:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    # Symmetrize away the sub-tolerance drift and freeze.
    mat = 0.5 * (mat + mat.conj().T)
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Hermitian matrix on a subsystem shape (observables, gradients, witnesses)."""

    shape: SubsystemShape
    matrix: np.ndarray = field(repr=False)

    def __init__(self, shape: SubsystemShape, matrix):
        mat = _as_hermitian(matrix, HERMITICITY_TOL)
        if mat.shape[0] != shape.total_dim:
            raise ShapeMismatch(
                f"matrix side {mat.shape[0]} != total dim {shape.total_dim}"
            )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Positive semidefinite, unit-trace Hermitian matrix on a subsystem shape."""

    shape: SubsystemShape
    matrix: np.ndarray = field(repr=False)

    def __init__(self, shape: SubsystemShape, matrix):
        mat = _as_hermitian(matrix, HERMITICITY_TOL)
        if mat.shape[0] != shape.total_dim:
            raise ShapeMismatch(
                f"matrix side {mat.shape[0]} != total dim {shape.total_dim}"
            )
        tr = float(np.real(np.trace(mat)))
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond tolerance")
        lo = float(np.linalg.eigvalsh(mat)[0])
        if lo < -PSD_TOL:
            raise ValueError(f"matrix has negative eigenvalue {lo:.3e}")
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.shape.total_dim

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True, eq=False)
class TestOperator:
    """Hermitian A with 0 <= A <= I; the acceptance operator of a binary test."""

    shape: SubsystemShape
    matrix: np.ndarray = field(repr=False)

    def __init__(self, shape: SubsystemShape, matrix):
        mat = _as_hermitian(matrix, HERMITICITY_TOL)
        if mat.shape[0] != shape.total_dim:
            raise ShapeMismatch(
                f"matrix side {mat.shape[0]} != total dim {shape.total_dim}"
            )
        eig = np.linalg.eigvalsh(mat)
        if eig[0] < -TEST_OPERATOR_TOL or eig[-1] > 1.0 + TEST_OPERATOR_TOL:
            raise ValueError(
                f"test operator eigenvalues outside [0, 1]: [{eig[0]:.3e}, {eig[-1]:.3e}]"
            )
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "matrix", mat)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def density_matrix(matrix, dims) -> DensityMatrix:
    """Build a DensityMatrix from a raw matrix and a dims list."""
    return DensityMatrix(SubsystemShape(dims), matrix)


def pure_state(vector, dims) -> DensityMatrix:
    """Rank-one density matrix |v><v| / <v|v>."""
    v = np.asarray(vector, dtype=complex).ravel()
    v = v / np.linalg.norm(v)
    return DensityMatrix(SubsystemShape(dims), np.outer(v, v.conj()))


def basis_state(dims, index: int) -> DensityMatrix:
    """Computational-basis projector |index><index|."""
    shape = SubsystemShape(dims)
    v = np.zeros(shape.total_dim)
    v[index] = 1.0
    return pure_state(v, dims)


def maximally_coherent_state(d: int) -> DensityMatrix:
    """Uniform-superposition pure state on a single d-dimensional factor."""
    return pure_state(np.ones(d), (d,))


def maximally_mixed_state(dims) -> DensityMatrix:
    shape = SubsystemShape(dims)
    d = shape.total_dim
    return DensityMatrix(shape, np.eye(d) / d)


def bell_state() -> DensityMatrix:
    """Two-qubit maximally entangled state (|00> + |11>)/sqrt(2)."""
    return pure_state([1.0, 0.0, 0.0, 1.0], (2, 2))


# ---------------------------------------------------------------------------
# Composition and reduction
# ---------------------------------------------------------------------------

def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product of two states on the concatenated shape."""
    return DensityMatrix(a.shape.concat(b.shape), np.kron(a.matrix, b.matrix))


def tensor_power(rho: DensityMatrix, n: int) -> DensityMatrix:
    """n-fold tensor power rho^(x)n; raises DimensionCap past MAX_TOTAL_DIM."""
    from .errors import DimensionCap

    if n < 1:
        raise ValueError("copy count must be >= 1")
    if rho.dim ** n > MAX_TOTAL_DIM:
        raise DimensionCap(
            f"dim {rho.dim}^{n} exceeds the supported cap {MAX_TOTAL_DIM}"
        )
    out = rho.matrix
    for _ in range(n - 1):
        out = np.kron(out, rho.matrix)
    return DensityMatrix(rho.shape.n_copy(n), out)


def _tensorize(matrix: np.ndarray, dims: tuple[int, ...]) -> np.ndarray:
    s = len(dims)
    return matrix.reshape(dims + dims), s


def partial_trace(rho: DensityMatrix, keep) -> DensityMatrix:
    """Trace out all factors not listed in ``keep`` (kept in original order)."""
    keep = sorted(set(int(k) for k in keep))
    dims = rho.shape.dims
    s = len(dims)
    if not keep:
        raise EmptyKeepSet("keep set must contain at least one subsystem")
    if keep[0] < 0 or keep[-1] >= s:
        raise ShapeMismatch(f"keep indices {keep} out of range for {s} factors")
    tens = rho.matrix.reshape(dims + dims)
    traced = [i for i in range(s) if i not in keep]
    # Contract traced row/column index pairs one at a time, highest first so
    # remaining axis numbers stay valid.
    for i in sorted(traced, reverse=True):
        tens = np.trace(tens, axis1=i, axis2=i + (tens.ndim // 2))
    kept_dims = tuple(dims[i] for i in keep)
    d = int(np.prod(kept_dims))
    return DensityMatrix(SubsystemShape(kept_dims), tens.reshape(d, d))


def permute_subsystems(rho: DensityMatrix, perm) -> DensityMatrix:
    """Reorder tensor factors: factor k of the result is factor perm[k] of rho."""
    dims = rho.shape.dims
    s = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(s)):
        raise InvalidPermutation(f"{perm} is not a permutation of 0..{s - 1}")
    tens = rho.matrix.reshape(dims + dims)
    axes = perm + tuple(p + s for p in perm)
    tens = tens.transpose(axes)
    new_dims = tuple(dims[p] for p in perm)
    d = rho.dim
    return DensityMatrix(SubsystemShape(new_dims), tens.reshape(d, d))


# ---------------------------------------------------------------------------
# Spectral calculus, entropies, distances
# ---------------------------------------------------------------------------

def _clamped_eigh(matrix: np.ndarray, clamp: float = PSD_TOL):
    """Eigendecomposition with small negative eigenvalues clamped to 0.

    Eigenvalues in [-clamp, 0) are numerical PSD drift; anything below
    -clamp is an invariant violation the caller should have rejected.
    """
    vals, vecs = np.linalg.eigh(matrix)
    vals = np.where((vals < 0) & (vals >= -clamp), 0.0, vals)
    return vals, vecs


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(rho) = -sum lambda log2 lambda, in bits, with 0 log 0 = 0."""
    vals, _ = _clamped_eigh(rho.matrix)
    pos = vals[vals > 0]
    return float(-np.sum(pos * np.log2(pos)))


def shannon_entropy(probs) -> float:
    """Entropy in bits of a probability vector (negatives clamped)."""
    p = np.clip(np.real(np.asarray(probs, dtype=float)), 0.0, None)
    pos = p[p > 0]
    return float(-np.sum(pos * np.log2(pos)))


def quantum_relative_entropy(
    rho: DensityMatrix,
    sigma: DensityMatrix,
    support_threshold: float = SUPPORT_THRESHOLD,
) -> float:
    """S(rho||sigma) = tr[rho (log2 rho - log2 sigma)]; +inf off sigma's support."""
    if rho.shape != sigma.shape:
        raise ShapeMismatch(f"{rho.shape} vs {sigma.shape}")
    svals, svecs = _clamped_eigh(sigma.matrix)
    kernel = svals <= support_threshold
    if np.any(kernel):
        proj = svecs[:, kernel]
        leak = float(np.real(np.einsum("ij,ji->", proj.conj().T @ rho.matrix, proj)))
        if leak > 10.0 * support_threshold:
            return math.inf
    rvals, rvecs = _clamped_eigh(rho.matrix)
    pos = rvals > 0
    term1 = float(np.sum(rvals[pos] * np.log2(rvals[pos])))
    safe = np.where(kernel, support_threshold, svals)
    log_sigma = (svecs * np.log2(safe)) @ svecs.conj().T
    term2 = float(np.real(np.trace(rho.matrix @ log_sigma)))
    return term1 - term2


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    """Half the trace norm of a - b; lies in [0, 1]."""
    if a.shape != b.shape:
        raise ShapeMismatch(f"{a.shape} vs {b.shape}")
    return trace_norm_half(a.matrix - b.matrix)


def trace_norm_half(delta: np.ndarray) -> float:
    vals = np.linalg.eigvalsh(0.5 * (delta + delta.conj().T))
    return float(min(max(0.5 * np.sum(np.abs(vals)), 0.0), 1.0))


def log_frechet_gradient(sigma_matrix: np.ndarray, rho_matrix: np.ndarray) -> np.ndarray:
    """Adjoint Frechet derivative of the matrix log at sigma applied to rho.

    Returns the gradient of sigma -> tr[rho ln(sigma)] via the
    Daleckii-Krein divided-difference construction on sigma's
    eigendecomposition.  sigma must be positive definite.
    """
    vals, vecs = np.linalg.eigh(sigma_matrix)
    if vals[0] <= 0:
        raise ValueError("sigma must be strictly positive definite")
    lv = np.log(vals)
    diff = vals[:, None] - vals[None, :]
    logdiff = lv[:, None] - lv[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        loewner = np.where(np.abs(diff) > 1e-14 * vals.max(), logdiff / diff, 0.0)
    same = np.abs(diff) <= 1e-14 * vals.max()
    loewner[same] = (1.0 / vals[:, None] * np.ones_like(diff))[same]
    rho_t = vecs.conj().T @ rho_matrix @ vecs
    grad = vecs @ (loewner * rho_t) @ vecs.conj().T
    return 0.5 * (grad + grad.conj().T)


# ---------------------------------------------------------------------------
# Random generators (deterministic under seed)
# ---------------------------------------------------------------------------

def random_density_matrix(dims, rank: int | None = None, seed=None) -> DensityMatrix:
    """Random state: reduced state of a Haar-random pure state on a dilation.

    ``rank`` is the dimension of the traced-out environment; rank=1 yields a
    Haar-random pure state.
    """
    shape = SubsystemShape(dims)
    d = shape.total_dim
    if rank is None:
        rank = d
    rank = int(rank)
    if rank < 1 or rank > d:
        raise InvalidRank(f"rank {rank} not in [1, {d}]")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    mat = g @ g.conj().T
    mat /= np.real(np.trace(mat))
    return DensityMatrix(shape, mat)


def random_hermitian(dims, seed=None, scale: float = 1.0) -> HermitianOperator:
    shape = SubsystemShape(dims)
    d = shape.total_dim
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return HermitianOperator(shape, scale * 0.5 * (g + g.conj().T))
