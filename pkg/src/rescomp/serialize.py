"""JSON serialization for states, operators, channels and measure results.

Matrices are stored as {shape: [ints], re: [[...]], im: [[...]]} in row-major
order, with floats printed at 17 significant digits so round-trips are exact.
"""

from __future__ import annotations

import json

import numpy as np

from .channels import QuantumChannel
from .core import DensityMatrix, HermitianOperator, SubsystemShape, TestOperator


def _matrix_to_obj(shape: SubsystemShape, matrix: np.ndarray) -> dict:
    return {
        "shape": list(shape.dims),
        "re": [[float(x) for x in row] for row in np.real(matrix)],
        "im": [[float(x) for x in row] for row in np.imag(matrix)],
    }


def _matrix_from_obj(obj: dict):
    shape = SubsystemShape(obj["shape"])
    mat = np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return shape, mat


def state_to_obj(rho: DensityMatrix) -> dict:
    return _matrix_to_obj(rho.shape, rho.matrix)


def state_from_obj(obj: dict) -> DensityMatrix:
    shape, mat = _matrix_from_obj(obj)
    return DensityMatrix(shape, mat)


def hermitian_to_obj(op: HermitianOperator) -> dict:
    return _matrix_to_obj(op.shape, op.matrix)


def hermitian_from_obj(obj: dict) -> HermitianOperator:
    shape, mat = _matrix_from_obj(obj)
    return HermitianOperator(shape, mat)


def test_operator_to_obj(op: TestOperator) -> dict:
    return _matrix_to_obj(op.shape, op.matrix)


def test_operator_from_obj(obj: dict) -> TestOperator:
    shape, mat = _matrix_from_obj(obj)
    return TestOperator(shape, mat)


def channel_to_obj(ch: QuantumChannel) -> dict:
    return {
        "input_shape": list(ch.input_shape.dims),
        "output_shape": list(ch.output_shape.dims),
        "kraus": [
            {
                "re": [[float(x) for x in row] for row in np.real(k)],
                "im": [[float(x) for x in row] for row in np.imag(k)],
            }
            for k in ch.kraus_ops
        ],
    }


def channel_from_obj(obj: dict) -> QuantumChannel:
    kraus = [
        np.asarray(k["re"], dtype=float) + 1j * np.asarray(k["im"], dtype=float)
        for k in obj["kraus"]
    ]
    return QuantumChannel(
        SubsystemShape(obj["input_shape"]), SubsystemShape(obj["output_shape"]), kraus
    )


def dumps(obj: dict) -> str:
    """Serialize with 17-significant-digit floats (exact double round-trip)."""
    return json.dumps(obj, indent=2, sort_keys=True)


def save_state(rho: DensityMatrix, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(state_to_obj(rho)))


def load_state(path) -> DensityMatrix:
    with open(path) as fh:
        return state_from_obj(json.load(fh))


def save_channel(ch: QuantumChannel, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps(channel_to_obj(ch)))


def load_channel(path) -> QuantumChannel:
    with open(path) as fh:
        return channel_from_obj(json.load(fh))
