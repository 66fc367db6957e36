"""Layered variational classifier: angle embedding, ZYZ rotation layers with
a CNOT ring, Z-measurement of the first k qubits, bias, softmax.

Per layer l (1-based), each qubit i gets RZ(t0) RY(t1) RZ(t2) and then a
CNOT from control i to target (i + l) mod n; the CNOT is skipped when the
target equals the control (l a multiple of n). Raw angles are re-mapped
before entering the circuit.

The batched fast path stores one register per row of a (batch, 2^n)
array; the three rotations of a qubit are fused into a single 2x2 unitary
before application, which is algebraically identical to applying them in
sequence.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import cos, sin
from pathlib import Path

import numpy as np

from . import _kernels
from .remap import RemapKind, remap_all
from .statevector import (
    MAX_QUBITS,
    RegisterSizeError,
    RotationAxis,
    StateVector,
    apply_cnot,
    apply_rotation,
)


@dataclass(frozen=True)
class ClassifierConfig:
    n_qubits: int
    n_layers: int
    n_classes: int
    embedding_axis: RotationAxis = RotationAxis.X
    remap: RemapKind = RemapKind.IDENTITY

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise RegisterSizeError(
                f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}"
            )
        if self.n_layers < 0:
            raise ValueError(f"n_layers must be >= 0, got {self.n_layers}")
        if not 1 <= self.n_classes <= self.n_qubits:
            raise ValueError(
                f"n_classes must be in [1, n_qubits={self.n_qubits}], "
                f"got {self.n_classes}"
            )
        if self.embedding_axis is RotationAxis.Z:
            raise ValueError("Z-axis embedding has no effect on |0>; use X or Y")


@dataclass
class ClassifierParams:
    """Raw (unbounded) rotation angles [layer][qubit][3] plus k output biases."""

    thetas: np.ndarray
    biases: np.ndarray

    def __post_init__(self):
        self.thetas = np.ascontiguousarray(self.thetas, dtype=np.float64)
        self.biases = np.ascontiguousarray(self.biases, dtype=np.float64)
        if self.thetas.ndim != 3 or self.thetas.shape[2] != 3:
            raise ValueError(
                f"thetas must have shape [layers][qubits][3], got {self.thetas.shape}"
            )
        if self.biases.ndim != 1:
            raise ValueError(f"biases must be a vector, got shape {self.biases.shape}")
        if not (np.all(np.isfinite(self.thetas)) and np.all(np.isfinite(self.biases))):
            raise ValueError("parameters must be finite")

    @property
    def n_parameters(self) -> int:
        return self.thetas.size + self.biases.size

    def copy(self) -> "ClassifierParams":
        return ClassifierParams(self.thetas.copy(), self.biases.copy())


def param_count(config: ClassifierConfig) -> int:
    return config.n_layers * config.n_qubits * 3 + config.n_classes


def check_params(config: ClassifierConfig, params: ClassifierParams) -> None:
    expected = (config.n_layers, config.n_qubits, 3)
    if params.thetas.shape != expected:
        raise ValueError(f"thetas shape {params.thetas.shape} != {expected}")
    if params.biases.shape != (config.n_classes,):
        raise ValueError(
            f"biases shape {params.biases.shape} != ({config.n_classes},)"
        )


def cnot_pairs(layer_index: int, n_qubits: int) -> list[tuple[int, int]]:
    """Entangler ring of layer l: control i -> target (i+l) mod n, skipping
    the degenerate control == target case."""
    if layer_index < 1:
        raise ValueError(f"layer_index must be >= 1, got {layer_index}")
    pairs = []
    for i in range(n_qubits):
        t = (i + layer_index) % n_qubits
        if t != i:
            pairs.append((i, t))
    return pairs


def embed_features(
    state: StateVector, features, axis: RotationAxis
) -> StateVector:
    """Rotate qubit j by features[j] around the embedding axis."""
    feats = np.asarray(features, dtype=np.float64)
    if axis is RotationAxis.Z:
        raise ValueError("embedding axis must be X or Y")
    if feats.shape != (state.n_qubits,):
        raise ValueError(
            f"expected {state.n_qubits} features, got shape {feats.shape}"
        )
    for j, angle in enumerate(feats):
        apply_rotation(state, axis, j, float(angle))
    return state


def apply_layer(
    state: StateVector, layer_thetas, layer_index: int, n_qubits: int
) -> StateVector:
    """One variational layer with already re-mapped angles [qubit][3]."""
    th = np.asarray(layer_thetas, dtype=np.float64)
    if th.shape != (n_qubits, 3):
        raise ValueError(f"layer_thetas shape {th.shape} != ({n_qubits}, 3)")
    for i in range(n_qubits):
        apply_rotation(state, RotationAxis.Z, i, th[i, 0])
        apply_rotation(state, RotationAxis.Y, i, th[i, 1])
        apply_rotation(state, RotationAxis.Z, i, th[i, 2])
    for control, target in cnot_pairs(layer_index, n_qubits):
        apply_cnot(state, control, target)
    return state


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def zyz_matrix(t0: float, t1: float, t2: float) -> np.ndarray:
    """Fused RZ(t2) @ RY(t1) @ RZ(t0) as one 2x2 unitary."""
    c, s = cos(t1 / 2.0), sin(t1 / 2.0)
    ap = np.exp(-0.5j * (t0 + t2))
    am = np.exp(-0.5j * (t0 - t2))
    return np.array(
        [[c * ap, -s * np.conj(am)], [s * am, c * np.conj(ap)]],
        dtype=np.complex128,
    )


def _embed_batch(amps: np.ndarray, features: np.ndarray, axis: RotationAxis, n: int):
    """Per-row embedding rotations; features has shape (rows, n)."""
    half = np.asarray(features, dtype=np.float64) / 2.0
    c = np.cos(half).astype(np.complex128)
    s = np.sin(half)
    for j in range(n):
        m = n - 1 - j
        if axis is RotationAxis.X:
            off = -1j * s[:, j]
            _kernels.apply_1q_per_row(amps, m, c[:, j], off, off, c[:, j])
        else:
            sj = s[:, j].astype(np.complex128)
            _kernels.apply_1q_per_row(amps, m, c[:, j], -sj, sj, c[:, j])


def _apply_layers_batch(amps: np.ndarray, mapped: np.ndarray, n: int):
    """All variational layers on a (rows, 2^n) amplitude array."""
    for l in range(1, mapped.shape[0] + 1):
        th = mapped[l - 1]
        for i in range(n):
            u = zyz_matrix(th[i, 0], th[i, 1], th[i, 2])
            _kernels.apply_1q(amps, n - 1 - i, u[0, 0], u[0, 1], u[1, 0], u[1, 1])
        for control, target in cnot_pairs(l, n):
            _kernels.apply_cnot(amps, n - 1 - control, n - 1 - target)


def _forward_amps(
    config: ClassifierConfig, mapped: np.ndarray, features: np.ndarray
) -> np.ndarray:
    """Final statevectors for a feature batch, one register per row."""
    n = config.n_qubits
    feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if feats.shape[1] != n:
        raise ValueError(f"expected {n} features per sample, got {feats.shape[1]}")
    amps = np.zeros((feats.shape[0], 1 << n), dtype=np.complex128)
    amps[:, 0] = 1.0
    _embed_batch(amps, feats, config.embedding_axis, n)
    _apply_layers_batch(amps, mapped, n)
    return amps


def measured_expectations(amps: np.ndarray, n_qubits: int, k: int) -> np.ndarray:
    """<Z> of the first k qubits, per row: shape (rows, k)."""
    out = np.empty((amps.shape[0], k), dtype=np.float64)
    col = np.empty(amps.shape[0], dtype=np.float64)
    for c in range(k):
        _kernels.exp_z(amps, n_qubits - 1 - c, col)
        out[:, c] = col
    return out


def forward_batch(
    config: ClassifierConfig, params: ClassifierParams, features
) -> np.ndarray:
    """Class probabilities for a (rows, n_qubits) feature matrix."""
    check_params(config, params)
    mapped = remap_all(config.remap, params.thetas)
    amps = _forward_amps(config, mapped, features)
    expectations = measured_expectations(amps, config.n_qubits, config.n_classes)
    return softmax(expectations + params.biases)


def forward(
    config: ClassifierConfig, params: ClassifierParams, features
) -> np.ndarray:
    """Class probabilities for a single feature vector."""
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim != 1:
        raise ValueError(f"forward expects a single feature vector, got {feats.shape}")
    return forward_batch(config, params, feats[np.newaxis, :])[0]


# --- checkpoint serialization -------------------------------------------
#
# Plain text, one value per line: three integer header lines (n_qubits,
# n_layers, n_classes), then thetas in [layer][qubit][rotation] row-major
# order, then the biases, floats at 17 significant digits.


def save_params(path, config: ClassifierConfig, params: ClassifierParams) -> None:
    check_params(config, params)
    lines = [str(config.n_qubits), str(config.n_layers), str(config.n_classes)]
    lines.extend(f"{v:.17g}" for v in params.thetas.ravel())
    lines.extend(f"{v:.17g}" for v in params.biases)
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path) -> tuple[int, int, int, ClassifierParams]:
    """Returns (n_qubits, n_layers, n_classes, params)."""
    lines = Path(path).read_text().split()
    if len(lines) < 3:
        raise ValueError(f"checkpoint {path} is truncated")
    n_qubits, n_layers, n_classes = (int(x) for x in lines[:3])
    n_thetas = n_layers * n_qubits * 3
    values = np.array([float(x) for x in lines[3:]], dtype=np.float64)
    if values.size != n_thetas + n_classes:
        raise ValueError(
            f"checkpoint {path}: expected {n_thetas + n_classes} values, "
            f"found {values.size}"
        )
    thetas = values[:n_thetas].reshape(n_layers, n_qubits, 3)
    biases = values[n_thetas:]
    return n_qubits, n_layers, n_classes, ClassifierParams(thetas, biases)
