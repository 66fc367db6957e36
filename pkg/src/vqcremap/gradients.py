"""Loss gradients with respect to the raw parameters.

Two engines with identical contracts:

* parameter-shift: two shifted circuit evaluations per rotation angle,
  d<Z>/dtheta = (E(theta + pi/2) - E(theta - pi/2)) / 2;
* adjoint: one forward statevector pass plus one reverse sweep over the
  gates, O(gates) for the whole gradient.

Both differentiate the mapped angles and multiply by the re-mapping
derivative, so the result is d(loss)/d(raw theta); the optimizer then
updates raw values only. The bias gradient is softmax(logits) - onehot
in both engines.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import cos, pi, sin

import numpy as np

from . import _kernels
from .model import (
    ClassifierConfig,
    ClassifierParams,
    _forward_amps,
    check_params,
    cnot_pairs,
    measured_expectations,
    softmax,
    zyz_matrix,
)
from .remap import remap_all, remap_derivative

PROB_FLOOR = 1e-12  # clamp before log; keeps cross-entropy finite


@dataclass
class Gradient:
    """d(loss)/d(raw thetas) and d(loss)/d(biases), shapes matching the params."""

    d_thetas: np.ndarray
    d_biases: np.ndarray

    def flat(self) -> np.ndarray:
        return np.concatenate([self.d_thetas.ravel(), self.d_biases])


def _check_label(label: int, n_classes: int) -> int:
    label = int(label)
    if not 0 <= label < n_classes:
        raise ValueError(f"label {label} outside [0, {n_classes})")
    return label


@lru_cache(maxsize=8)
def _z_sign_table(n_qubits: int, k: int) -> np.ndarray:
    """(k, 2^n) table of Z eigenvalues, +1 where the measured bit is 0."""
    idx = np.arange(1 << n_qubits)
    signs = np.empty((k, idx.size), dtype=np.float64)
    for c in range(k):
        bits = (idx >> (n_qubits - 1 - c)) & 1
        signs[c] = 1.0 - 2.0 * bits
    return signs


def batch_loss_gradient(
    config: ClassifierConfig,
    params: ClassifierParams,
    features,
    labels,
) -> tuple[float, Gradient]:
    """Mean cross-entropy over the batch and its gradient, via the adjoint
    engine. features is (batch, n_qubits); labels is (batch,)."""
    check_params(config, params)
    feats = np.atleast_2d(np.asarray(features, dtype=np.float64))
    labs = np.atleast_1d(np.asarray(labels, dtype=np.int64))
    if feats.shape[0] != labs.shape[0]:
        raise ValueError(
            f"{feats.shape[0]} feature rows vs {labs.shape[0]} labels"
        )
    k = config.n_classes
    for lab in labs:
        _check_label(lab, k)

    n = config.n_qubits
    batch = feats.shape[0]
    mapped = remap_all(config.remap, params.thetas)
    amps = _forward_amps(config, mapped, feats)
    expectations = measured_expectations(amps, n, k)
    probs = softmax(expectations + params.biases)
    picked = np.maximum(probs[np.arange(batch), labs], PROB_FLOOR)
    loss = float(-np.log(picked).mean())

    g = probs.copy()
    g[np.arange(batch), labs] -= 1.0
    g /= batch  # fold the batch mean into the observable weights

    # bra rows carry the effective observable M = sum_c g_c Z_c per sample
    buf = np.empty((2 * batch, amps.shape[1]), dtype=np.complex128)
    buf[:batch] = amps
    buf[batch:] = (g @ _z_sign_table(n, k)) * amps
    ket = buf[:batch]
    bra = buf[batch:]

    d_mapped = np.zeros_like(params.thetas)
    for l in range(config.n_layers, 0, -1):
        for control, target in reversed(cnot_pairs(l, n)):
            _kernels.apply_cnot(buf, n - 1 - control, n - 1 - target)
        th = mapped[l - 1]
        for i in range(n - 1, -1, -1):
            t0, t1, t2 = th[i]
            s1, c1 = sin(t1), cos(t1)
            s2, c2 = sin(t2), cos(t2)
            # tangent observables of the fused ZYZ gate, one per angle
            z0, z1, z2 = _kernels.grad_zyz(
                bra, ket, n - 1 - i, s1 * c2, s1 * s2, c1, -s2, c2
            )
            d_mapped[l - 1, i, 0] = z0.imag
            d_mapped[l - 1, i, 1] = z1.imag
            d_mapped[l - 1, i, 2] = z2.imag
            u = zyz_matrix(t0, t1, t2)
            _kernels.apply_1q(
                buf,
                n - 1 - i,
                np.conj(u[0, 0]),
                np.conj(u[1, 0]),
                np.conj(u[0, 1]),
                np.conj(u[1, 1]),
            )
        # the embedding below layer 1 carries no trainable angles, so the
        # reverse sweep can stop once layer 1 is processed

    d_thetas = d_mapped * remap_derivative(config.remap, params.thetas)
    return loss, Gradient(d_thetas, g.sum(axis=0))


def loss_gradient_adjoint(
    config: ClassifierConfig, params: ClassifierParams, features, label: int
) -> Gradient:
    """Exact gradient of cross_entropy(forward(...), label) for one sample."""
    _, grad = batch_loss_gradient(config, params, features, [label])
    return grad


def _expectations_for_mapped(
    config: ClassifierConfig, mapped: np.ndarray, features
) -> np.ndarray:
    amps = _forward_amps(config, mapped, np.asarray(features, dtype=np.float64))
    return measured_expectations(amps, config.n_qubits, config.n_classes)[0]


def parameter_shift_expectation_grad(
    config: ClassifierConfig,
    mapped_thetas,
    features,
    qubit: int,
    param_index: int,
) -> float:
    """d<Z_qubit>/d(mapped angle) via the two-term shift rule."""
    mapped = np.asarray(mapped_thetas, dtype=np.float64)
    if not 0 <= qubit < config.n_qubits:
        raise ValueError(f"qubit {qubit} out of range")
    if not 0 <= param_index < mapped.size:
        raise ValueError(f"param_index {param_index} out of range")
    out = np.empty(1, dtype=np.float64)
    shifted = []
    for sign in (1.0, -1.0):
        m = mapped.copy()
        m.ravel()[param_index] += sign * pi / 2.0
        amps = _forward_amps(config, m, np.asarray(features, dtype=np.float64))
        _kernels.exp_z(amps, config.n_qubits - 1 - qubit, out)
        shifted.append(float(out[0]))
    return (shifted[0] - shifted[1]) / 2.0


def loss_gradient_shift(
    config: ClassifierConfig, params: ClassifierParams, features, label: int
) -> Gradient:
    """Same contract as loss_gradient_adjoint, assembled from per-parameter
    shift-rule expectation gradients plus the softmax/cross-entropy and
    re-mapping chain factors."""
    check_params(config, params)
    label = _check_label(label, config.n_classes)
    feats = np.asarray(features, dtype=np.float64)
    k = config.n_classes
    mapped = remap_all(config.remap, params.thetas)

    expectations = _expectations_for_mapped(config, mapped, feats)
    probs = softmax(expectations + params.biases)
    g = probs.copy()
    g[label] -= 1.0

    d_mapped = np.zeros_like(mapped)
    flat = d_mapped.ravel()
    for idx in range(mapped.size):
        d_exp = np.empty(k)
        for c in range(k):
            d_exp[c] = parameter_shift_expectation_grad(
                config, mapped, feats, c, idx
            )
        flat[idx] = g @ d_exp
    d_thetas = d_mapped * remap_derivative(config.remap, params.thetas)
    return Gradient(d_thetas, g)
