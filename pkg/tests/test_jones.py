import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarlink.jones import (
    IDENTITY,
    JonesOperator,
    PolarizationState,
    apply,
    cascade,
    distance_up_to_phase,
    equal_up_to_phase,
    fit_global_phase,
    fold_axis_difference,
    intensity,
    normalize_angle,
    rotate_operator,
    rotation_matrix,
)

angles = st.floats(-720, 720, allow_nan=False)


def test_rotation_examples():
    assert np.allclose(rotation_matrix(0).m, np.eye(2))
    assert np.allclose(rotation_matrix(90).m, [[0, -1], [1, 0]], atol=1e-15)
    # cos/sin evaluated by hand
    assert np.allclose(rotation_matrix(30).m, [[0.8660, -0.5], [0.5, 0.8660]], atol=1e-4)


def test_rotate_operator_examples():
    assert np.allclose(rotate_operator(IDENTITY, 33).m, np.eye(2))
    out = rotate_operator(JonesOperator(np.diag([1, -1])), 90)
    assert np.allclose(out.m, np.diag([-1, 1]), atol=1e-15)


def test_apply_examples():
    x = PolarizationState(1, 0)
    assert apply(IDENTITY, x) == x
    y = apply(rotation_matrix(90), x)
    assert abs(y.ex) < 1e-15 and abs(y.ey - 1) < 1e-15
    d = apply(rotation_matrix(45), x)
    assert abs(d.ex - 0.7071) < 1e-4 and abs(d.ey - 0.7071) < 1e-4


def test_cascade_examples():
    assert np.allclose(cascade([IDENTITY, IDENTITY]).m, np.eye(2))
    assert np.allclose(cascade([rotation_matrix(10), rotation_matrix(20)]).m, rotation_matrix(30).m, atol=1e-9)
    with pytest.raises(ValueError):
        cascade([])


def test_cascade_order_first_element_acts_first():
    a = JonesOperator(np.diag([1, 0]))
    r = rotation_matrix(90)
    # polarizer then rotator: x light survives and is turned to y
    out = apply(cascade([a, r]), PolarizationState(1, 0))
    assert abs(out.ey) == pytest.approx(1)


def test_intensity_examples():
    assert intensity(PolarizationState(1, 0)) == 1
    assert intensity(PolarizationState(0.6, 0.8j)) == pytest.approx(1.0)
    assert intensity(PolarizationState(0, 0)) == 0


def test_non_finite_rejected():
    with pytest.raises(ValueError):
        PolarizationState(math.nan, 0)
    with pytest.raises(ValueError):
        JonesOperator([[math.inf, 0], [0, 1]])
    with pytest.raises(ValueError):
        JonesOperator(np.eye(3))
    with pytest.raises(ValueError):
        rotation_matrix(math.nan)


def test_operator_is_read_only():
    op = rotation_matrix(10)
    with pytest.raises(ValueError):
        op.m[0, 0] = 2


def test_global_phase_fit():
    a = rotation_matrix(20)
    b = JonesOperator(np.exp(1j * 0.7) * a.m)
    assert fit_global_phase(b, a) == pytest.approx(0.7)
    assert equal_up_to_phase(a, b)
    assert distance_up_to_phase(a, rotation_matrix(21)) > 1e-3


def test_fold_and_normalize():
    assert normalize_angle(180) == 180
    assert normalize_angle(-180) == 180
    assert normalize_angle(370) == pytest.approx(10)
    assert fold_axis_difference(170) == pytest.approx(10)
    assert fold_axis_difference(-100) == pytest.approx(80)
    assert fold_axis_difference(90) == 90


@given(angles)
def test_rotation_is_orthogonal(t):
    r = rotation_matrix(t).m
    assert np.allclose(r @ r.T, np.eye(2), atol=1e-12)
    assert np.linalg.det(r) == pytest.approx(1.0)


@given(angles, angles)
def test_rotation_group_closure(a, b):
    assert np.allclose(cascade([rotation_matrix(a), rotation_matrix(b)]).m, rotation_matrix(a + b).m, atol=1e-9)


@given(angles, st.floats(-1, 1), st.floats(-1, 1))
def test_rotation_preserves_intensity(t, ex, ey):
    j = PolarizationState(ex, ey)
    assert intensity(apply(rotation_matrix(t), j)) == pytest.approx(intensity(j), abs=1e-12)


@given(angles)
def test_normalize_range(t):
    n = normalize_angle(t)
    assert -180 < n <= 180
    assert math.isclose(math.cos(math.radians(n)), math.cos(math.radians(t)), abs_tol=1e-9)


@given(angles)
def test_fold_range_and_symmetry(t):
    f = fold_axis_difference(t)
    assert 0 <= f <= 90
    assert fold_axis_difference(t + 180) == pytest.approx(f, abs=1e-9)
    assert fold_axis_difference(-t) == pytest.approx(f, abs=1e-9)


@given(st.lists(angles, min_size=3, max_size=3))
def test_cascade_associative(ts):
    a, b, c = (rotate_operator(JonesOperator(np.diag([1, 1j])), t) for t in ts)
    left = cascade([cascade([a, b]), c]).m
    right = cascade([a, cascade([b, c])]).m
    assert np.allclose(left, right, atol=1e-12)
