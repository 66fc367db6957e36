"""Exact dense statevector simulation of a small qubit register.

Conventions, fixed once for the whole package:

* Gate convention: R_a(theta) = exp(-i * theta * sigma_a / 2) (half-angle),
  so <Z> after RX(x)|0> equals cos(x).
* Qubit ordering: qubit 0 is the most significant bit of the amplitude
  index (big-endian). |10> on two qubits is amplitude index 2.
* Amplitudes are stored dense (complex128); gates mutate the array in
  place over strided index pairs, O(2^n) per gate.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from math import cos, sin

import numpy as np

from . import _kernels

MAX_QUBITS = 24


class RegisterSizeError(ValueError):
    """Requested register is outside the practical simulation bound."""


class RotationAxis(enum.Enum):
    X = "x"
    Y = "y"
    Z = "z"


@dataclass
class StateVector:
    """n-qubit register: 2**n_qubits complex amplitudes, unit L2 norm."""

    n_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class Rotation:
    axis: RotationAxis
    target: int
    angle: float


@dataclass(frozen=True)
class CNot:
    control: int
    target: int


GateOp = Rotation | CNot


def zero_state(n_qubits: int) -> StateVector:
    """|0...0> on n_qubits qubits."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise RegisterSizeError(
            f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}"
        )
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _check_qubit(state: StateVector, q: int, name: str = "qubit") -> None:
    if not 0 <= q < state.n_qubits:
        raise ValueError(f"{name} index {q} out of range for {state.n_qubits} qubits")


def rotation_matrix(axis: RotationAxis, angle: float) -> np.ndarray:
    """2x2 matrix of exp(-i * angle * sigma_axis / 2)."""
    c, s = cos(angle / 2.0), sin(angle / 2.0)
    if axis is RotationAxis.X:
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)
    if axis is RotationAxis.Y:
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[c - 1j * s, 0.0], [0.0, c + 1j * s]], dtype=np.complex128)


def apply_rotation(
    state: StateVector, axis: RotationAxis, target: int, angle: float
) -> StateVector:
    """Rotate `target` by `angle` around `axis`, in place."""
    _check_qubit(state, target, "target")
    if not np.isfinite(angle):
        raise ValueError(f"rotation angle must be finite, got {angle!r}")
    m = state.n_qubits - 1 - target
    amps2d = state.amplitudes.reshape(1, -1)
    c, s = cos(angle / 2.0), sin(angle / 2.0)
    if axis is RotationAxis.Z:
        _kernels.apply_diag(amps2d, m, complex(c, -s), complex(c, s))
    elif axis is RotationAxis.X:
        _kernels.apply_1q(amps2d, m, c + 0j, -1j * s, -1j * s, c + 0j)
    else:
        _kernels.apply_1q(amps2d, m, c + 0j, -s + 0j, s + 0j, c + 0j)
    return state


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Flip `target` on every amplitude whose `control` bit is 1, in place."""
    _check_qubit(state, control, "control")
    _check_qubit(state, target, "target")
    if control == target:
        raise ValueError(f"CNOT control and target must differ (both {control})")
    n = state.n_qubits
    amps2d = state.amplitudes.reshape(1, -1)
    _kernels.apply_cnot(amps2d, n - 1 - control, n - 1 - target)
    return state


def expectation_z(state: StateVector, qubit: int) -> float:
    """<Z> of one qubit: sum of |a_i|^2 * (+1 if bit clear else -1)."""
    _check_qubit(state, qubit)
    out = np.empty(1, dtype=np.float64)
    _kernels.exp_z(state.amplitudes.reshape(1, -1), state.n_qubits - 1 - qubit, out)
    return float(out[0])


def apply_gate(state: StateVector, op: GateOp) -> StateVector:
    if isinstance(op, Rotation):
        return apply_rotation(state, op.axis, op.target, op.angle)
    return apply_cnot(state, op.control, op.target)


def apply_ops(state: StateVector, ops: list[GateOp]) -> StateVector:
    for op in ops:
        apply_gate(state, op)
    return state
