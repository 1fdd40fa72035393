import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from etdispatch.errors import NegativeGap
from etdispatch.objectives import (
    SQUARE_OF_SQUARE,
    PreferenceIndex,
    Quadratic,
    ScaledQuadratic,
    Technical,
    convexity_modulus,
    eval_objective,
    eval_preference,
    grad_objective,
    grad_preference,
    strong_convexity_estimate,
    update_weights,
    value_coeffs,
)
from etdispatch.projection import Interval

# first and last benchmark units (generation, emission, deviation curves)
MG1_ECO = Quadratic(0.086, 3.482, 3.481)
MG6_ENV = ScaledQuadratic(0.2, 0.156, 1.173, 2.073)
MG1_TEC = Technical(1.0, 90.0)


def test_benchmark_values():
    # hand-computed: 0.086*100^2 + 3.482*100 + 3.481
    assert eval_objective(MG1_ECO, 100.0) == pytest.approx(1211.681, abs=1e-9)
    # 0.2 * (0.156*90^2 + 1.173*90 + 2.073)
    assert eval_objective(MG6_ENV, 90.0) == pytest.approx(274.2486, abs=1e-9)
    assert eval_objective(MG1_TEC, 100.0) == pytest.approx(100.0, abs=1e-12)
    assert grad_objective(MG1_ECO, 100.0) == pytest.approx(20.682, abs=1e-12)


def test_square_of_square_form():
    f = Technical(2.0, 9.0, form=SQUARE_OF_SQUARE)
    # 2 (x^2 - 9)^2 at x = 2 -> 2 * 25
    assert eval_objective(f, 2.0) == pytest.approx(50.0)
    # d/dx = 8 x (x^2 - 9) at x = 2 -> 16 * (-5)
    assert grad_objective(f, 2.0) == pytest.approx(-80.0)


@settings(max_examples=80, deadline=None)
@given(
    a=st.floats(min_value=0.01, max_value=5.0),
    b=st.floats(min_value=-5.0, max_value=5.0),
    c=st.floats(min_value=-5.0, max_value=5.0),
    x=st.floats(min_value=-50.0, max_value=50.0),
)
def test_gradient_matches_finite_difference(a, b, c, x):
    h = 1e-5
    for f in [Quadratic(a, b, c), ScaledQuadratic(0.3, a, b, c), Technical(a, b)]:
        fd = (eval_objective(f, x + h) - eval_objective(f, x - h)) / (2.0 * h)
        scale = max(1.0, abs(fd))
        assert grad_objective(f, x) == pytest.approx(fd, abs=1e-5 * scale)


def test_grad_is_derivative_of_value_coeffs():
    f = Technical(1.5, 3.0, form=SQUARE_OF_SQUARE)
    der = np.polyder(value_coeffs(f))
    for x in [-2.0, 0.0, 1.7, 4.0]:
        assert grad_objective(f, x) == pytest.approx(float(np.polyval(der, x)))


def test_convexity_modulus():
    box = Interval(100.0, 140.0)
    assert convexity_modulus(MG1_ECO, box) == pytest.approx(0.172)
    assert convexity_modulus(MG6_ENV, box) == pytest.approx(2 * 0.2 * 0.156)
    assert convexity_modulus(MG1_TEC, box) == pytest.approx(2.0)
    # quartic form: min of 12 a x^2 - 4 a p over [1, 2] is at x = 1
    f = Technical(0.5, 1.0, form=SQUARE_OF_SQUARE)
    assert convexity_modulus(f, Interval(1.0, 2.0)) == pytest.approx(
        12 * 0.5 - 4 * 0.5, rel=1e-2
    )


def test_preference_validation():
    objs = (MG1_ECO, MG1_TEC)
    with pytest.raises(ValueError):
        PreferenceIndex(p=0.5, weights=[0.5, 0.5], ideal_values=[0, 0], objectives=objs)
    with pytest.raises(ValueError):
        PreferenceIndex(p=2, weights=[-0.1, 1.1], ideal_values=[0, 0], objectives=objs)
    with pytest.raises(ValueError):
        PreferenceIndex(p=2, weights=[0.3, 0.3], ideal_values=[0, 0], objectives=objs)


def _toy_pref(p=2.0):
    # both objectives minimized at x = 5 with minimum value 0
    objs = (Quadratic(1.0, -10.0, 25.0), Quadratic(2.0, -20.0, 50.0))
    return PreferenceIndex(
        p=p, weights=[0.4, 0.6], ideal_values=[0.0, 0.0], objectives=objs
    )


def test_preference_value_and_gradient():
    u = _toy_pref()
    x = 7.0
    gaps = np.array([4.0, 8.0])  # (x-5)^2 and 2 (x-5)^2
    expected = float(np.sqrt(0.4 * gaps[0] ** 2 + 0.6 * gaps[1] ** 2))
    assert eval_preference(u, x) == pytest.approx(expected, abs=1e-12)
    h = 1e-6
    fd = (eval_preference(u, x + h) - eval_preference(u, x - h)) / (2.0 * h)
    assert grad_preference(u, x) == pytest.approx(fd, abs=1e-5)


def test_preference_p1_is_weighted_sum():
    u = _toy_pref(p=1.0)
    assert eval_preference(u, 7.0) == pytest.approx(0.4 * 4.0 + 0.6 * 8.0)
    assert grad_preference(u, 7.0) == pytest.approx(0.4 * 4.0 + 0.6 * 8.0)


def test_preference_gradient_zero_at_ideal():
    u = _toy_pref()
    assert eval_preference(u, 5.0) == pytest.approx(0.0, abs=1e-12)
    assert grad_preference(u, 5.0) == 0.0


def test_negative_gap_detected():
    u = PreferenceIndex(
        p=2.0,
        weights=[1.0],
        ideal_values=[100.0],  # unattainably high declared ideal
        objectives=(Quadratic(1.0, 0.0, 0.0),),
    )
    with pytest.raises(NegativeGap):
        eval_preference(u, 1.0)


def test_update_weights():
    w = update_weights([2.0, -3.0, 5.0])
    assert np.allclose(w, [0.2, 0.3, 0.5])
    assert w.sum() == pytest.approx(1.0)
    # degenerate all-zero input falls back to uniform
    assert np.allclose(update_weights([0.0, 0.0]), [0.5, 0.5])


def test_strong_convexity_estimate_away_from_ideal():
    u = _toy_pref()
    m = strong_convexity_estimate(u, Interval(6.0, 9.0), n_samples=50)
    assert np.isfinite(m)
    assert m > 0.0
