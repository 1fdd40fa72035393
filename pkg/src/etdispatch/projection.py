"""Interval projection and the differentiated (tangent-cone) projection."""

from dataclasses import dataclass

from .errors import InfeasibleState

# a state within this distance of a bound counts as sitting on it
BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class Interval:
    """Closed interval [lower, upper], the local constraint set."""

    lower: float
    upper: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"empty interval [{self.lower}, {self.upper}]")

    def contains(self, x: float, tol: float = BOUNDARY_TOL) -> bool:
        return self.lower - tol <= x <= self.upper + tol


def project_point(set_: Interval, x: float) -> float:
    """Euclidean projection: clamp x into the interval."""
    return min(max(x, set_.lower), set_.upper)


def project_tangent(set_: Interval, x: float, v: float) -> float:
    """Project a flow direction v onto the tangent cone at x.

    Interior points pass v through; on a boundary the outward component is
    removed, which for an interval means returning 0 whenever v pushes past
    the active bound.  x must already be feasible (within BOUNDARY_TOL).
    """
    if not set_.contains(x):
        raise InfeasibleState(f"x = {x} outside [{set_.lower}, {set_.upper}]")
    if x <= set_.lower + BOUNDARY_TOL and v < 0:
        return 0.0
    if x >= set_.upper - BOUNDARY_TOL and v > 0:
        return 0.0
    return v
