"""Centralized reference pipeline for a full scenario.

Solves each single-objective dispatch, extracts ideal points and the
normalized weights, assembles the per-agent preference indexes, and solves
the compromise dispatch.  Used to validate the distributed runs.
"""

from dataclasses import dataclass
from functools import partial

import numpy as np

from .objectives import (
    PreferenceIndex,
    eval_objective,
    eval_preference,
    grad_objective,
    grad_preference,
)
from .oracle import (
    DispatchSolution,
    KktReport,
    ideal_point,
    solve_dispatch,
    verify_kkt,
)
from .scenario import Scenario


@dataclass(frozen=True)
class ReferenceSolution:
    per_objective: tuple  # one DispatchSolution per objective
    ideal_x: np.ndarray  # (K, N)
    ideal_values: np.ndarray  # (K, N)
    weights: np.ndarray  # (K, N)
    preferences: tuple  # one PreferenceIndex per agent
    compromise: DispatchSolution
    kkt: KktReport


def objective_dispatch(scenario: Scenario, k: int) -> DispatchSolution:
    """Single-objective dispatch min sum_i f_i^k subject to balance and box."""
    grads = [partial(grad_objective, a.objectives[k]) for a in scenario.agents]
    vals = [partial(eval_objective, a.objectives[k]) for a in scenario.agents]
    return solve_dispatch(grads, scenario.bounds, scenario.total_demand, values=vals)


def reference_weights(scenario: Scenario, per_objective) -> np.ndarray:
    """Normalized weights from the per-objective optimal allocations."""
    n, k = scenario.n_agents, scenario.n_objectives
    raw = np.empty((k, n))
    for kk in range(k):
        x = per_objective[kk].x_star
        for i, a in enumerate(scenario.agents):
            raw[kk, i] = abs(eval_objective(a.objectives[kk], x[i]))
    return raw / raw.sum(axis=0)


def solve_reference(scenario: Scenario) -> ReferenceSolution:
    n, k = scenario.n_agents, scenario.n_objectives
    per_objective = tuple(objective_dispatch(scenario, kk) for kk in range(k))
    weights = reference_weights(scenario, per_objective)

    ideal_x = np.empty((k, n))
    ideal_values = np.empty((k, n))
    for i, a in enumerate(scenario.agents):
        for kk in range(k):
            ideal_x[kk, i], ideal_values[kk, i] = ideal_point(
                a.objectives[kk], a.bounds
            )

    preferences = tuple(
        PreferenceIndex(
            p=scenario.p_norm,
            weights=weights[:, i],
            ideal_values=ideal_values[:, i],
            objectives=scenario.agents[i].objectives,
        )
        for i in range(n)
    )
    grads = [partial(grad_preference, u) for u in preferences]
    vals = [partial(eval_preference, u) for u in preferences]
    compromise = solve_dispatch(
        grads, scenario.bounds, scenario.total_demand, values=vals
    )
    kkt = verify_kkt(compromise, grads, scenario.bounds, scenario.total_demand)
    return ReferenceSolution(
        per_objective=per_objective,
        ideal_x=ideal_x,
        ideal_values=ideal_values,
        weights=weights,
        preferences=preferences,
        compromise=compromise,
        kkt=kkt,
    )
