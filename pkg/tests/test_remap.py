import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vqcremap.remap import (
    PI,
    RemapKind,
    remap_all,
    remap_derivative,
    remap_from_name,
    remap_value,
)

ALL_KINDS = list(RemapKind)
BOUNDED_KINDS = [RemapKind.CLAMP, RemapKind.TANH, RemapKind.ARCTAN, RemapKind.SIGMOID]
ODD_KINDS = [k for k in ALL_KINDS if k is not RemapKind.ELU]

finite_theta = st.floats(min_value=-100.0, max_value=100.0, allow_nan=False)


def central_difference(kind, theta, h=1e-6):
    return (remap_value(kind, theta + h) - remap_value(kind, theta - h)) / (2 * h)


# --- values -----------------------------------------------------------------


def test_clamp_values():
    assert remap_value(RemapKind.CLAMP, 5.0) == PI
    assert remap_value(RemapKind.CLAMP, -7.0) == -PI
    assert remap_value(RemapKind.CLAMP, 1.5) == 1.5


def test_zero_at_origin():
    for kind in ALL_KINDS:
        assert abs(remap_value(kind, 0.0)) <= 1e-15
    # exact zeros for the piecewise/identity maps
    for kind in (RemapKind.IDENTITY, RemapKind.CLAMP, RemapKind.ELU):
        assert remap_value(kind, 0.0) == 0.0


def test_arctan_value_oracle():
    # high-precision oracle for 2*arctan(2*theta) at theta = 1
    assert remap_value(RemapKind.ARCTAN, 1.0) == pytest.approx(
        2.0 * math.atan(2.0), abs=1e-15
    )


def test_tanh_saturates():
    assert remap_value(RemapKind.TANH, 1000.0) == pytest.approx(
        PI * math.tanh(1000.0), abs=1e-15
    )
    assert remap_value(RemapKind.TANH, 1000.0) == pytest.approx(PI)


def test_sigmoid_matches_literal_formula():
    # implementation uses pi*tanh(t/2); must equal 2*pi/(1+e^-t) - pi
    for theta in np.linspace(-30, 30, 401):
        literal = 2 * PI / (1 + math.exp(-theta)) - PI
        assert remap_value(RemapKind.SIGMOID, theta) == pytest.approx(
            literal, abs=1e-12
        )


def test_elu_matches_literal_formula():
    for theta in np.linspace(-20, 5, 301):
        literal = PI * (math.exp(theta) - 1) if theta < 0 else theta
        assert remap_value(RemapKind.ELU, theta) == pytest.approx(literal, abs=1e-12)


def test_identity_passthrough():
    assert remap_value(RemapKind.IDENTITY, 17.3) == 17.3
    assert remap_value(RemapKind.IDENTITY, -123.0) == -123.0


# --- derivatives --------------------------------------------------------------


def test_identity_derivative():
    assert remap_derivative(RemapKind.IDENTITY, 17.3) == 1.0


def test_tanh_derivative_at_zero_vs_central_difference():
    fd = central_difference(RemapKind.TANH, 0.0)
    assert abs(fd - PI) < 1e-6
    assert remap_derivative(RemapKind.TANH, 0.0) == pytest.approx(PI, abs=1e-15)


def test_clamp_derivative_outside_interval():
    assert remap_derivative(RemapKind.CLAMP, 4.0) == 0.0
    assert remap_derivative(RemapKind.CLAMP, -4.0) == 0.0
    assert remap_derivative(RemapKind.CLAMP, 0.5) == 1.0


def test_kink_conventions():
    # inclusive-interior values at the non-differentiable points
    assert remap_derivative(RemapKind.CLAMP, PI) == 1.0
    assert remap_derivative(RemapKind.CLAMP, -PI) == 1.0
    assert remap_derivative(RemapKind.ELU, 0.0) == 1.0


def test_sigmoid_derivative_matches_literal():
    for theta in np.linspace(-25, 25, 201):
        literal = 2 * PI * math.exp(-theta) / (1 + math.exp(-theta)) ** 2
        assert remap_derivative(RemapKind.SIGMOID, theta) == pytest.approx(
            literal, abs=1e-12
        )


def test_derivative_no_overflow_far_out():
    for kind in ALL_KINDS:
        for theta in (-750.0, 750.0):
            v = remap_derivative(kind, theta)
            assert np.isfinite(v) and v >= 0.0


# --- property tests -------------------------------------------------------------


@given(theta=finite_theta)
def test_bounded_kinds_stay_in_interval(theta):
    for kind in BOUNDED_KINDS:
        assert -PI <= remap_value(kind, theta) <= PI


@given(theta=finite_theta)
def test_elu_lower_bound(theta):
    # strictly above -pi wherever float64 can represent the gap; the map
    # saturates to exactly -pi once pi*expm1(theta) rounds to -pi
    value = remap_value(RemapKind.ELU, theta)
    assert value >= -PI
    if theta > -30.0:
        assert value > -PI


@given(theta=finite_theta)
def test_odd_symmetry(theta):
    for kind in ODD_KINDS:
        assert remap_value(kind, -theta) == pytest.approx(
            -remap_value(kind, theta), abs=1e-12
        )


@given(t1=finite_theta, t2=finite_theta)
def test_monotonicity(t1, t2):
    lo, hi = min(t1, t2), max(t1, t2)
    for kind in ALL_KINDS:
        assert remap_value(kind, lo) <= remap_value(kind, hi) + 1e-15


@settings(max_examples=300)
@given(theta=st.floats(min_value=-10.0, max_value=10.0, allow_nan=False))
def test_derivative_matches_central_difference(theta):
    for kind in ALL_KINDS:
        if kind is RemapKind.CLAMP and abs(abs(theta) - PI) < 1e-3:
            continue  # kink
        if kind is RemapKind.ELU and abs(theta) < 1e-3:
            continue  # kink
        fd = central_difference(kind, theta)
        assert abs(remap_derivative(kind, theta) - fd) < 1e-5


def test_range_sweep_bulk():
    rng = np.random.default_rng(0)
    thetas = rng.uniform(-100, 100, 100_000)
    for kind in BOUNDED_KINDS:
        vals = remap_value(kind, thetas)
        assert vals.min() >= -PI and vals.max() <= PI
    elu = remap_value(RemapKind.ELU, thetas)
    assert elu.min() >= -PI
    representable = thetas > -30.0
    assert np.all(elu[representable] > -PI)


def test_derivatives_nonnegative_bulk():
    rng = np.random.default_rng(1)
    thetas = rng.uniform(-50, 50, 10_000)
    for kind in ALL_KINDS:
        assert np.all(remap_derivative(kind, thetas) >= 0.0)


# --- array semantics and serialization ------------------------------------------


def test_remap_all_elementwise():
    np.testing.assert_array_equal(
        remap_all(RemapKind.IDENTITY, [0.1, -2.0]), [0.1, -2.0]
    )
    np.testing.assert_allclose(
        remap_all(RemapKind.CLAMP, [-7.0, 0.0, 7.0]), [-PI, 0.0, PI]
    )
    out = remap_all(RemapKind.TANH, [1000.0])
    assert out.shape == (1,)
    assert out[0] == pytest.approx(PI)


def test_remap_all_preserves_shape():
    arr = np.linspace(-3, 3, 24).reshape(2, 4, 3)
    out = remap_all(RemapKind.SIGMOID, arr)
    assert out.shape == arr.shape


def test_nonfinite_inputs_rejected():
    for kind in ALL_KINDS:
        with pytest.raises(ValueError):
            remap_value(kind, float("nan"))
        with pytest.raises(ValueError):
            remap_derivative(kind, float("inf"))
        with pytest.raises(ValueError):
            remap_all(kind, [0.0, float("-inf")])


def test_wire_names_round_trip():
    names = ["none", "clamp", "tanh", "arctan", "sigmoid", "elu"]
    assert [k.value for k in RemapKind] == names
    for name in names:
        assert remap_from_name(name).value == name
    assert remap_from_name("TANH") is RemapKind.TANH
    with pytest.raises(ValueError):
        remap_from_name("identity")
