"""Time-based generators: time-varying gains and their gauge integrals.

A generator supplies a nonnegative gain T(t) = dgamma/dt that multiplies the
flow field so the state settles (approximately) by the prescribed time, and
drops back to unit gain afterwards.  Three concrete kinds are provided:

* ``quadratic``           -- gamma = 12 t^2 before t_pre (gain 24 t)
* ``constant_boost``      -- constant gain 30 before t_pre
* ``polynomial_blowup``   -- 1 + bdot / (1 - b + eps) with b a degree-6
  smoothstep polynomial; eps keeps the denominator away from zero.
"""

import math
from dataclasses import dataclass

from .errors import NegativeTime, NonPositiveScale, ReversedInterval

QUADRATIC = "quadratic"
CONSTANT_BOOST = "constant_boost"
POLYNOMIAL_BLOWUP = "polynomial_blowup"
KINDS = (QUADRATIC, CONSTANT_BOOST, POLYNOMIAL_BLOWUP)


@dataclass(frozen=True)
class TbgSpec:
    kind: str
    t_pre: float
    epsilon_reg: float = 1e-7
    # sigma is part of the generic gauge definition but unused by the three
    # concrete kinds; carried for future gauges.
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown TBG kind {self.kind!r}")
        if self.t_pre <= 0:
            raise ValueError("t_pre must be positive")
        if self.epsilon_reg <= 0:
            raise ValueError("epsilon_reg must be positive")


@dataclass(frozen=True)
class ConvergenceBound:
    """Error-radius diagnostic from the gauge increment and decay rate."""

    gamma_at_tpre: float
    rate: float
    v0: float
    epsilon_bound: float
    scale: float = 1.0


def _smoothstep(spec: TbgSpec, t: float) -> float:
    """Degree-6 transition polynomial b(t): 0 at t=0, 1 at t_pre."""
    if t >= spec.t_pre:
        return 1.0
    s = t / spec.t_pre
    return 10.0 * s**6 - 24.0 * s**5 + 15.0 * s**4


def _smoothstep_dot(spec: TbgSpec, t: float) -> float:
    if t >= spec.t_pre:
        return 0.0
    s = t / spec.t_pre
    return (60.0 * s**5 - 120.0 * s**4 + 60.0 * s**3) / spec.t_pre


def gain(spec: TbgSpec, t: float, left: bool = False) -> float:
    """Gain T(t).

    With ``left=True`` the pre-settling branch is used at t == t_pre, so an
    integration step ending exactly on the breakpoint sees the gain it
    integrated against (the gain jumps there for the first two kinds).
    """
    if t < 0:
        raise NegativeTime(f"t = {t} < 0")
    before = t < spec.t_pre or (left and t <= spec.t_pre)
    if spec.kind == QUADRATIC:
        return 24.0 * t if before else 1.0
    if spec.kind == CONSTANT_BOOST:
        return 30.0 if before else 1.0
    # polynomial blowup; continuous at t_pre because bdot(t_pre) = 0
    if not before:
        return 1.0
    b = _smoothstep(spec, t)
    bdot = _smoothstep_dot(spec, t)
    return 1.0 + bdot / (1.0 - b + spec.epsilon_reg)


def stage_gains(spec: TbgSpec, t: float, h: float) -> tuple:
    """Gains at (t, t + h/2, t + h) for one integration step.

    The caller aligns the grid so no step straddles t_pre; the endpoint gain
    uses the left branch when the step starts before the breakpoint.
    """
    return (
        gain(spec, t),
        gain(spec, t + 0.5 * h, left=t < spec.t_pre),
        gain(spec, t + h, left=t < spec.t_pre),
    )


def gauge_increment(spec: TbgSpec, t_from: float, t_to: float) -> float:
    """Integral of the gain over [t_from, t_to].

    Closed-form antiderivatives per kind; this is the gauge increase that
    enters the error-radius formula and the trigger-variable lower bound.
    """
    if t_from < 0:
        raise NegativeTime(f"t_from = {t_from} < 0")
    if t_to < t_from:
        raise ReversedInterval(f"[{t_from}, {t_to}] is reversed")
    tp = spec.t_pre
    pre_hi = min(t_to, tp)
    post_lo = max(t_from, tp)
    post = max(t_to - post_lo, 0.0)
    if t_from >= tp:
        pre = 0.0
    elif spec.kind == QUADRATIC:
        pre = 12.0 * (pre_hi**2 - t_from**2)
    elif spec.kind == CONSTANT_BOOST:
        pre = 30.0 * (pre_hi - t_from)
    else:
        eps = spec.epsilon_reg
        b0 = _smoothstep(spec, t_from)
        b1 = _smoothstep(spec, pre_hi)
        pre = (pre_hi - t_from) + math.log((1.0 - b0 + eps) / (1.0 - b1 + eps))
    return pre + post


def error_bound(rate: float, v0: float, scale: float, gamma_inc: float) -> float:
    """Error radius sqrt(exp(-rate * gamma_inc) * v0 / scale)."""
    if scale <= 0:
        raise NonPositiveScale(f"scale = {scale} must be positive")
    return math.sqrt(math.exp(-rate * gamma_inc) * v0 / scale)


def convergence_bound(
    spec: TbgSpec, rate: float, v0: float, scale: float = 1.0
) -> ConvergenceBound:
    """Bundle the gauge increment over [0, t_pre] with the resulting radius."""
    g = gauge_increment(spec, 0.0, spec.t_pre)
    return ConvergenceBound(
        gamma_at_tpre=g,
        rate=rate,
        v0=v0,
        scale=scale,
        epsilon_bound=error_bound(rate, v0, scale, g),
    )
