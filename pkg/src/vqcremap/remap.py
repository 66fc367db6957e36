"""Weight re-mapping: squashing raw rotation angles into [-pi, pi].

Six fixed elementwise maps, each with an analytic derivative. The raw
trainable parameters stay unbounded; the map is applied on every forward
pass, never during the optimizer update. Mapping applies to rotation
angles only, not to the output biases.
"""
from __future__ import annotations

import enum

import numpy as np

PI = np.pi


class RemapKind(enum.Enum):
    """The six re-mapping functions. `.value` is the wire/CLI name."""

    IDENTITY = "none"
    CLAMP = "clamp"
    TANH = "tanh"
    ARCTAN = "arctan"
    SIGMOID = "sigmoid"
    ELU = "elu"


def remap_from_name(name: str) -> RemapKind:
    try:
        return RemapKind(name.lower())
    except ValueError:
        valid = ", ".join(k.value for k in RemapKind)
        raise ValueError(f"unknown remap kind {name!r}; expected one of: {valid}")


def _as_finite_array(theta) -> np.ndarray:
    arr = np.asarray(theta, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("remap input must be finite")
    return arr


def remap_value(kind: RemapKind, theta):
    """Mapped angle(s). Scalar in, float out; array in, array out."""
    arr = _as_finite_array(theta)
    if kind is RemapKind.IDENTITY:
        out = arr.copy()
    elif kind is RemapKind.CLAMP:
        out = np.clip(arr, -PI, PI)
    elif kind is RemapKind.TANH:
        out = PI * np.tanh(arr)
    elif kind is RemapKind.ARCTAN:
        out = 2.0 * np.arctan(2.0 * arr)
    elif kind is RemapKind.SIGMOID:
        # 2*pi/(1+exp(-t)) - pi, written as pi*tanh(t/2) to avoid exp overflow
        out = PI * np.tanh(arr / 2.0)
    else:  # ELU with alpha = pi
        out = np.where(arr < 0.0, PI * np.expm1(arr), arr)
    return float(out) if np.isscalar(theta) else out


def remap_derivative(kind: RemapKind, theta):
    """d(remap_value)/d(theta). Kinks use the inclusive-interior value."""
    arr = _as_finite_array(theta)
    if kind is RemapKind.IDENTITY:
        out = np.ones_like(arr)
    elif kind is RemapKind.CLAMP:
        # 1 on [-pi, pi] (inclusive at the kinks), 0 outside
        out = np.where(np.abs(arr) <= PI, 1.0, 0.0)
    elif kind is RemapKind.TANH:
        t = np.tanh(arr)
        out = PI * (1.0 - t * t)
    elif kind is RemapKind.ARCTAN:
        out = 4.0 / (1.0 + 4.0 * arr * arr)
    elif kind is RemapKind.SIGMOID:
        t = np.tanh(arr / 2.0)
        out = (PI / 2.0) * (1.0 - t * t)
    else:  # ELU: pi*e^t below 0, 1 at and above 0
        out = np.where(arr < 0.0, PI * np.exp(np.minimum(arr, 0.0)), 1.0)
    return float(out) if np.isscalar(theta) else out


def remap_all(kind: RemapKind, thetas) -> np.ndarray:
    """Elementwise remap_value over a sequence/array of angles."""
    arr = _as_finite_array(thetas)
    return remap_value(kind, arr)
