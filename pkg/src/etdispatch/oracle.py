"""Centralized reference solvers for validating the distributed runs.

Two independent routes solve the shared-multiplier dispatch (equal-marginal
bisection and projected-gradient descent), plus a KKT residual report and a
brute-force Pareto check for desk-scale instances.
"""

import math
from dataclasses import dataclass
from itertools import product
from typing import Callable, List, Sequence

import numpy as np

from .errors import GridTooCoarse, InfeasibleDemand, NonMonotoneGradient
from .objectives import ObjectiveFn, eval_objective, grad_objective
from .projection import Interval

BALANCE_TOL = 1e-10
INVERSE_TOL = 1e-12
ACTIVE_TOL = 1e-7

LOWER = "lower"
UPPER = "upper"
INTERIOR = "interior"


@dataclass(frozen=True)
class DispatchSolution:
    x_star: np.ndarray
    multiplier: float
    active_bounds: tuple
    objective_value: float


@dataclass(frozen=True)
class KktReport:
    balance_residual: float
    stationarity_residual: float
    feasibility_residual: float

    def ok(self, tol: float = 1e-7) -> bool:
        return (
            self.balance_residual < tol
            and self.stationarity_residual < tol
            and self.feasibility_residual < tol
        )


def _grad_inverse(g: Callable[[float], float], bounds: Interval, lam: float) -> float:
    """Clamp-composed inverse of a strictly increasing gradient."""
    lo, hi = bounds.lower, bounds.upper
    if g(lo) >= lam:
        return lo
    if g(hi) <= lam:
        return hi
    a, b = lo, hi
    while b - a > INVERSE_TOL:
        m = 0.5 * (a + b)
        if g(m) < lam:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def solve_dispatch(
    gradients: Sequence[Callable[[float], float]],
    bounds: Sequence[Interval],
    demand: float,
    values: Sequence[Callable[[float], float]] = None,
) -> DispatchSolution:
    """Equal-marginal dispatch: bisection on the shared multiplier.

    Each gradient must be strictly increasing over its interval; feasibility
    requires sum(lower) <= demand <= sum(upper).
    """
    n = len(gradients)
    lo_sum = sum(b.lower for b in bounds)
    hi_sum = sum(b.upper for b in bounds)
    if not lo_sum <= demand <= hi_sum:
        raise InfeasibleDemand(
            f"demand {demand} outside [{lo_sum}, {hi_sum}]"
        )
    for g, b in zip(gradients, bounds):
        mid = 0.5 * (b.lower + b.upper)
        if not g(b.lower) <= g(mid) <= g(b.upper):
            raise NonMonotoneGradient("gradient is not increasing on its interval")

    def allocation(lam):
        return np.array([_grad_inverse(g, b, lam) for g, b in zip(gradients, bounds)])

    lam_lo = min(g(b.lower) for g, b in zip(gradients, bounds)) - 1.0
    lam_hi = max(g(b.upper) for g, b in zip(gradients, bounds)) + 1.0
    for _ in range(200):
        lam = 0.5 * (lam_lo + lam_hi)
        x = allocation(lam)
        gap = x.sum() - demand
        if abs(gap) < BALANCE_TOL:
            break
        if gap < 0:
            lam_lo = lam
        else:
            lam_hi = lam
    else:
        x = allocation(0.5 * (lam_lo + lam_hi))
    # exact balance: spread the residual over interior agents
    interior = [
        i
        for i in range(n)
        if bounds[i].lower + ACTIVE_TOL < x[i] < bounds[i].upper - ACTIVE_TOL
    ]
    if interior:
        x[interior] -= (x.sum() - demand) / len(interior)

    flags = []
    for i in range(n):
        if x[i] <= bounds[i].lower + ACTIVE_TOL:
            flags.append(LOWER)
        elif x[i] >= bounds[i].upper - ACTIVE_TOL:
            flags.append(UPPER)
        else:
            flags.append(INTERIOR)
    value = (
        sum(v(xi) for v, xi in zip(values, x)) if values is not None else math.nan
    )
    return DispatchSolution(
        x_star=x, multiplier=float(lam), active_bounds=tuple(flags), objective_value=value
    )


def _project_feasible(
    x: np.ndarray, bounds: Sequence[Interval], demand: float
) -> np.ndarray:
    """Euclidean projection onto {sum = demand} intersected with the box."""
    lo = np.array([b.lower for b in bounds])
    hi = np.array([b.upper for b in bounds])
    span = float(np.max(np.abs(x)) + np.max(hi - lo) + abs(demand) + 1.0)
    a, b = -span, span
    for _ in range(200):
        tau = 0.5 * (a + b)
        s = np.clip(x - tau, lo, hi).sum()
        if abs(s - demand) < BALANCE_TOL:
            break
        if s > demand:
            a = tau
        else:
            b = tau
    return np.clip(x - 0.5 * (a + b), lo, hi)


def projected_gradient_dispatch(
    gradients: Sequence[Callable[[float], float]],
    bounds: Sequence[Interval],
    demand: float,
    step: float = None,
    max_iter: int = 200_000,
    tol: float = 1e-12,
) -> np.ndarray:
    """Independent reference: projected gradient descent on the feasible set."""
    lo = np.array([b.lower for b in bounds])
    hi = np.array([b.upper for b in bounds])
    if not lo.sum() <= demand <= hi.sum():
        raise InfeasibleDemand(f"demand {demand} outside [{lo.sum()}, {hi.sum()}]")
    x = _project_feasible(0.5 * (lo + hi), bounds, demand)
    if step is None:
        # conservative inverse-curvature estimate from gradient differences
        curv = max(
            abs(g(b.upper) - g(b.lower)) / max(b.upper - b.lower, 1e-12)
            for g, b in zip(gradients, bounds)
        )
        step = 1.0 / max(curv, 1e-12)
    for _ in range(max_iter):
        grad = np.array([g(xi) for g, xi in zip(gradients, x)])
        x_new = _project_feasible(x - step * grad, bounds, demand)
        if np.max(np.abs(x_new - x)) < tol:
            x = x_new
            break
        x = x_new
    return x


def ideal_point(f: ObjectiveFn, bounds: Interval) -> tuple:
    """Constrained minimizer of a strongly convex scalar objective."""
    lo, hi = bounds.lower, bounds.upper
    if grad_objective(f, lo) >= 0:
        x = lo
    elif grad_objective(f, hi) <= 0:
        x = hi
    else:
        a, b = lo, hi
        while b - a > INVERSE_TOL:
            m = 0.5 * (a + b)
            if grad_objective(f, m) < 0:
                a = m
            else:
                b = m
        x = 0.5 * (a + b)
    return x, eval_objective(f, x)


def verify_kkt(
    solution: DispatchSolution,
    gradients: Sequence[Callable[[float], float]],
    bounds: Sequence[Interval],
    demand: float,
) -> KktReport:
    """Residuals of balance, projected stationarity, and feasibility."""
    x = solution.x_star
    lam = solution.multiplier
    balance = abs(float(x.sum()) - demand)
    stat = 0.0
    feas = 0.0
    for i, (g, b) in enumerate(zip(gradients, bounds)):
        gi = g(x[i])
        feas = max(feas, b.lower - x[i], x[i] - b.upper, 0.0)
        if x[i] <= b.lower + ACTIVE_TOL:
            stat = max(stat, lam - gi, 0.0)
        elif x[i] >= b.upper - ACTIVE_TOL:
            stat = max(stat, gi - lam, 0.0)
        else:
            stat = max(stat, abs(gi - lam))
    return KktReport(
        balance_residual=balance,
        stationarity_residual=stat,
        feasibility_residual=feas,
    )


@dataclass(frozen=True)
class NetworkObjectives:
    """Weighted per-objective network costs F^k(x) = sum_i w_ik f_ik(x_i)."""

    objectives: tuple  # per agent, tuple of ObjectiveFn
    weights: np.ndarray  # (n_agents, n_objectives)
    bounds: tuple  # per agent Interval
    demand: float

    def cost(self, k: int, x: np.ndarray) -> float:
        return float(
            sum(
                self.weights[i, k] * eval_objective(self.objectives[i][k], x[i])
                for i in range(len(x))
            )
        )


def pareto_check(
    candidate: np.ndarray, objectives: NetworkObjectives, grid: float
) -> bool:
    """Exhaustive grid check of Pareto optimality on a small instance.

    Enumerates grid points of the equality-constrained feasible set and
    returns False iff some point weakly improves every weighted network
    objective and strictly improves one.
    """
    n = len(objectives.bounds)
    n_obj = objectives.weights.shape[1]
    lo = np.array([b.lower for b in objectives.bounds])
    hi = np.array([b.upper for b in objectives.bounds])
    points: List[np.ndarray] = []
    if n == 2:
        a = max(lo[0], objectives.demand - hi[1])
        b = min(hi[0], objectives.demand - lo[1])
        for x1 in np.arange(a, b + 0.5 * grid, grid):
            points.append(np.array([x1, objectives.demand - x1]))
    else:
        axes = [np.arange(lo[i], hi[i] + 0.5 * grid, grid) for i in range(n - 1)]
        for head in product(*axes):
            tail = objectives.demand - sum(head)
            if lo[n - 1] - 1e-12 <= tail <= hi[n - 1] + 1e-12:
                points.append(np.array(list(head) + [tail]))
    if len(points) < 100:
        raise GridTooCoarse(f"only {len(points)} feasible grid points")

    ref = np.array([objectives.cost(k, candidate) for k in range(n_obj)])
    tol = 1e-9
    for x in points:
        costs = np.array([objectives.cost(k, x) for k in range(n_obj)])
        if np.all(costs <= ref + tol) and np.any(costs < ref - tol):
            return False
    return True
