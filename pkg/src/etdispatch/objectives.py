"""Local objective functions and the weighted-Lp preference index.

Each agent carries several strongly convex scalar objectives (economic,
environmental, technical in the power-dispatch case study).  The preference
index blends the gaps to per-objective ideal values into one scalar whose
minimizer is a Pareto point of the original multiobjective problem.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import NegativeGap
from .projection import Interval

log = logging.getLogger(__name__)

GAP_TOL = 1e-9
# below this preference value the gradient is defined as 0 (the exact chain
# rule is 0/0 there and the point is stationary)
U_FLOOR = 1e-12

SQUARED_DEVIATION = "squared_deviation"
SQUARE_OF_SQUARE = "square_of_square"


@dataclass(frozen=True)
class Quadratic:
    """a x^2 + b x + c with a > 0."""

    a: float
    b: float
    c: float


@dataclass(frozen=True)
class ScaledQuadratic:
    """scale * (a x^2 + b x + c); used for the fuel/emission curves."""

    scale: float
    a: float
    b: float
    c: float


@dataclass(frozen=True)
class Technical:
    """Deviation penalty around a preferred operating point.

    form selects between a_tec (x - p_opt)^2 and a_tec (x^2 - p_opt)^2; only
    the first is convex over typical operating intervals.
    """

    a_tec: float
    p_opt: float
    form: str = SQUARED_DEVIATION


ObjectiveFn = Union[Quadratic, ScaledQuadratic, Technical]


def value_coeffs(f: ObjectiveFn) -> np.ndarray:
    """Quartic coefficients [c4, c3, c2, c1, c0] of the objective value."""
    if isinstance(f, Quadratic):
        return np.array([0.0, 0.0, f.a, f.b, f.c])
    if isinstance(f, ScaledQuadratic):
        return f.scale * np.array([0.0, 0.0, f.a, f.b, f.c])
    if f.form == SQUARED_DEVIATION:
        a, p = f.a_tec, f.p_opt
        return np.array([0.0, 0.0, a, -2.0 * a * p, a * p * p])
    a, p = f.a_tec, f.p_opt
    return np.array([a, 0.0, -2.0 * a * p, 0.0, a * p * p])


def grad_coeffs(f: ObjectiveFn) -> np.ndarray:
    """Cubic coefficients [g3, g2, g1, g0] of the objective derivative."""
    c4, c3, c2, c1, _ = value_coeffs(f)
    return np.array([4.0 * c4, 3.0 * c3, 2.0 * c2, c1])


def eval_objective(f: ObjectiveFn, x: float) -> float:
    return float(np.polyval(value_coeffs(f), x))


def grad_objective(f: ObjectiveFn, x: float) -> float:
    return float(np.polyval(grad_coeffs(f), x))


def convexity_modulus(f: ObjectiveFn, interval: Interval, n_samples: int = 1000) -> float:
    """Strong-convexity modulus over the interval.

    Analytic (2a) for the quadratic kinds; for the quartic technical form the
    second derivative is sampled over the interval and its minimum returned.
    """
    if isinstance(f, Quadratic):
        return 2.0 * f.a
    if isinstance(f, ScaledQuadratic):
        return 2.0 * f.scale * f.a
    if f.form == SQUARED_DEVIATION:
        return 2.0 * f.a_tec
    xs = np.linspace(interval.lower, interval.upper, n_samples)
    return float(np.min(12.0 * f.a_tec * xs**2 - 4.0 * f.a_tec * f.p_opt))


@dataclass(frozen=True)
class PreferenceIndex:
    """Weighted Lp compromise over objective gaps to the ideal values."""

    p: float
    weights: np.ndarray
    ideal_values: np.ndarray
    objectives: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))
        object.__setattr__(
            self, "ideal_values", np.asarray(self.ideal_values, dtype=float)
        )
        if self.p < 1:
            raise ValueError("p must satisfy 1 <= p < inf")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


def _gaps(u: PreferenceIndex, x: float) -> np.ndarray:
    gaps = np.array(
        [eval_objective(f, x) - v for f, v in zip(u.objectives, u.ideal_values)]
    )
    if np.any(gaps < -GAP_TOL):
        raise NegativeGap(
            f"objective value below declared ideal at x = {x}: gaps = {gaps}"
        )
    return np.maximum(gaps, 0.0)


def eval_preference(u: PreferenceIndex, x: float) -> float:
    """Lp compromise value (sum_k w_k gap_k^p)^(1/p)."""
    gaps = _gaps(u, x)
    return float(np.sum(u.weights * gaps**u.p) ** (1.0 / u.p))


def grad_preference(u: PreferenceIndex, x: float) -> float:
    """Chain-rule derivative of the compromise value.

    At the ideal point the exact expression is 0/0; the gradient is defined
    as 0 once the value drops below U_FLOOR, which preserves the flow's
    equilibria.
    """
    gaps = _gaps(u, x)
    grads = np.array([grad_objective(f, x) for f in u.objectives])
    if u.p == 1:
        return float(np.sum(u.weights * grads))
    val = float(np.sum(u.weights * gaps**u.p) ** (1.0 / u.p))
    if val < U_FLOOR:
        return 0.0
    return float(val ** (1.0 - u.p) * np.sum(u.weights * gaps ** (u.p - 1.0) * grads))


def update_weights(objective_values: Sequence[float]) -> np.ndarray:
    """Normalize absolute objective values onto the probability simplex.

    All-zero input falls back to uniform weights with a logged warning; the
    rule is undefined there and the case never arises with strictly positive
    cost curves.
    """
    vals = np.abs(np.asarray(objective_values, dtype=float))
    total = vals.sum()
    if total == 0.0:
        log.warning("all objective values are zero; falling back to uniform weights")
        return np.full(len(vals), 1.0 / len(vals))
    return vals / total


def strong_convexity_estimate(
    u: PreferenceIndex, interval: Interval, n_samples: int = 1000, h: float = 1e-5
) -> float:
    """Numerical strong-convexity modulus of the preference index.

    Minimum second difference over a grid; diagnostic only, never used in
    control laws.
    """
    xs = np.linspace(interval.lower + h, interval.upper - h, n_samples)
    second = np.array(
        [
            (eval_preference(u, x + h) - 2 * eval_preference(u, x) + eval_preference(u, x - h))
            / h**2
            for x in xs
        ]
    )
    return float(np.min(second))
