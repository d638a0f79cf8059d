"""Completely positive trace-preserving maps in Kraus form."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import DensityMatrix, SubsystemShape, TestOperator
from .errors import ShapeMismatch

TP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """CPTP map given by Kraus operators (output-dim x input-dim each)."""

    input_shape: SubsystemShape
    output_shape: SubsystemShape
    kraus_ops: tuple = field(repr=False)

    def __init__(self, input_shape, output_shape, kraus_ops):
        ops = []
        din, dout = input_shape.total_dim, output_shape.total_dim
        for k in kraus_ops:
            k = np.asarray(k, dtype=complex)
            if k.shape != (dout, din):
                raise ShapeMismatch(
                    f"Kraus operator shape {k.shape} != ({dout}, {din})"
                )
            k = k.copy()
            k.setflags(write=False)
            ops.append(k)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        object.__setattr__(self, "input_shape", input_shape)
        object.__setattr__(self, "output_shape", output_shape)
        object.__setattr__(self, "kraus_ops", tuple(ops))
        defect = self.tp_defect()
        if defect > TP_TOL:
            raise ValueError(f"Kraus operators not trace preserving (defect {defect:.3e})")

    def tp_defect(self) -> float:
        """Operator-norm deviation of sum K^dag K from the identity."""
        din = self.input_shape.total_dim
        acc = np.zeros((din, din), dtype=complex)
        for k in self.kraus_ops:
            acc += k.conj().T @ k
        return float(np.linalg.norm(acc - np.eye(din), ord=2))

    def apply_matrix(self, mat: np.ndarray) -> np.ndarray:
        dout = self.output_shape.total_dim
        out = np.zeros((dout, dout), dtype=complex)
        for k in self.kraus_ops:
            out += k @ mat @ k.conj().T
        return out


def apply_channel(ch: QuantumChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.shape != ch.input_shape:
        raise ShapeMismatch(f"state on {rho.shape}, channel expects {ch.input_shape}")
    return DensityMatrix(ch.output_shape, ch.apply_matrix(rho.matrix))


class MeasureAndPrepareChannel(QuantumChannel):
    """Two-outcome measure-and-prepare map:

        X -> tr(A X) * out_accept + tr((I - A) X) * out_reject.

    Kraus operators are derived from the POVM {A, I - A} and the spectral
    decompositions of the two output states.  ``apply_matrix`` and
    ``tp_defect`` use the factored form directly, so large instances never
    materialize the full Kraus family.
    """

    def __init__(
        self,
        test: TestOperator,
        out_accept: DensityMatrix,
        out_reject: DensityMatrix,
    ):
        if out_accept.shape != out_reject.shape:
            raise ShapeMismatch("output states on different shapes")
        # Bypass the parent constructor; closure is checked in factored form
        # and the Kraus family is materialized lazily (it has one operator
        # per POVM eigenvector / output eigenvector pair).
        object.__setattr__(self, "input_shape", test.shape)
        object.__setattr__(self, "output_shape", out_accept.shape)
        object.__setattr__(self, "_test", test)
        object.__setattr__(self, "_out_accept", out_accept)
        object.__setattr__(self, "_out_reject", out_reject)
        object.__setattr__(self, "_kraus_cache", None)

    @property
    def kraus_ops(self) -> tuple:
        if self._kraus_cache is None:
            avals, avecs = np.linalg.eigh(self._test.matrix)
            avals = np.clip(avals, 0.0, 1.0)
            kraus = []
            for weights, state in (
                (avals, self._out_accept),
                (1.0 - avals, self._out_reject),
            ):
                svals, svecs = np.linalg.eigh(state.matrix)
                svals = np.clip(svals, 0.0, None)
                for k in range(len(avals)):
                    if weights[k] < 1e-14:
                        continue
                    for j in range(len(svals)):
                        if svals[j] < 1e-14:
                            continue
                        coeff = np.sqrt(weights[k] * svals[j])
                        kraus.append(
                            coeff * np.outer(svecs[:, j], avecs[:, k].conj())
                        )
            object.__setattr__(self, "_kraus_cache", tuple(kraus))
        return self._kraus_cache

    @property
    def test(self) -> TestOperator:
        return self._test

    @property
    def out_accept(self) -> DensityMatrix:
        return self._out_accept

    @property
    def out_reject(self) -> DensityMatrix:
        return self._out_reject

    def acceptance_probability(self, mat: np.ndarray) -> float:
        return float(np.real(np.trace(self._test.matrix @ mat)))

    def apply_matrix(self, mat: np.ndarray) -> np.ndarray:
        p = self.acceptance_probability(mat)
        tr = float(np.real(np.trace(mat)))
        return p * self._out_accept.matrix + (tr - p) * self._out_reject.matrix

    def tp_defect(self) -> float:
        # sum K^dag K = tr(out_accept) A + tr(out_reject) (I - A); both output
        # traces are 1 up to state tolerance, so the defect reduces to:
        a = self._test.matrix
        da = float(np.real(np.trace(self._out_accept.matrix))) - 1.0
        dr = float(np.real(np.trace(self._out_reject.matrix))) - 1.0
        din = self.input_shape.total_dim
        return float(np.linalg.norm(da * a + dr * (np.eye(din) - a), ord=2))


# ---------------------------------------------------------------------------
# Stock channels and random generation
# ---------------------------------------------------------------------------

def identity_channel(shape: SubsystemShape) -> QuantumChannel:
    return QuantumChannel(shape, shape, [np.eye(shape.total_dim)])


def replace_channel(input_shape: SubsystemShape, target: DensityMatrix) -> QuantumChannel:
    """Discard the input and prepare ``target``."""
    din = input_shape.total_dim
    vals, vecs = np.linalg.eigh(target.matrix)
    vals = np.clip(vals, 0.0, None)
    kraus = []
    for j in range(len(vals)):
        if vals[j] < 1e-14:
            continue
        for i in range(din):
            e = np.zeros(din)
            e[i] = 1.0
            kraus.append(np.sqrt(vals[j]) * np.outer(vecs[:, j], e))
    return QuantumChannel(input_shape, target.shape, kraus)


def depolarizing_channel(shape: SubsystemShape, p: float) -> QuantumChannel:
    """Mix with the maximally mixed state: X -> (1-p) X + p tr(X) I/d."""
    from .core import maximally_mixed_state

    d = shape.total_dim
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    kraus = [np.sqrt(1.0 - p) * np.eye(d)]
    repl = replace_channel(shape, maximally_mixed_state(shape.dims))
    kraus.extend(np.sqrt(p) * k for k in repl.kraus_ops)
    return QuantumChannel(shape, shape, kraus)


def mix_channels(channels, weights) -> QuantumChannel:
    """Convex combination of channels with a common input/output shape."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValueError("weights must be a probability vector")
    first = channels[0]
    kraus = []
    for ch, w in zip(channels, weights):
        if ch.input_shape != first.input_shape or ch.output_shape != first.output_shape:
            raise ShapeMismatch("mixed channels must share shapes")
        if w == 0.0:
            continue
        kraus.extend(np.sqrt(w) * k for k in ch.kraus_ops)
    return QuantumChannel(first.input_shape, first.output_shape, kraus)


def random_channel(
    input_shape: SubsystemShape,
    output_shape: SubsystemShape,
    kraus_count: int = 2,
    seed=None,
) -> QuantumChannel:
    """Random CPTP map from a truncated Haar-random isometry."""
    if kraus_count < 1:
        raise ValueError("kraus_count must be >= 1")
    din, dout = input_shape.total_dim, output_shape.total_dim
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dout * kraus_count, din)) + 1j * rng.standard_normal(
        (dout * kraus_count, din)
    )
    if dout * kraus_count < din:
        raise ValueError("kraus_count too small for an isometric dilation")
    q, r = np.linalg.qr(g)
    # Fix the QR gauge so the isometry is Haar distributed.
    q = q * np.sign(np.real(np.diagonal(r)) + 1e-300)
    kraus = [q[i * dout : (i + 1) * dout, :] for i in range(kraus_count)]
    return QuantumChannel(input_shape, output_shape, kraus)
