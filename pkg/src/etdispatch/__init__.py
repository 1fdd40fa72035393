"""Event-triggered prescribed-time distributed multiobjective dispatch.

Simulates a three-layer continuous flow (per-objective subproblems, ideal
point seekers, and a compromise layer minimizing a weighted-Lp preference
index) over a communication graph, with event-triggered broadcasts and
time-varying gains that settle each layer by its prescribed time.
Centralized solvers provide an independent reference for every quantity.
"""

from .dynamics import (
    AgentCompromiseState,
    AgentObjectiveState,
    IdealState,
    MetricsBundle,
    SimulationRun,
    initialize_run,
    run_algorithm1,
    step_simulation,
)
from .etm import EtmParams, EtmState
from .graph import Network, build_network, cycle_adjacency
from .kernels import BACKEND, HAVE_COMPILED
from .objectives import PreferenceIndex, Quadratic, ScaledQuadratic, Technical
from .oracle import DispatchSolution, pareto_check, solve_dispatch
from .projection import Interval
from .reference import ReferenceSolution, solve_reference
from .scenario import (
    CASE_PRESETS,
    AgentSpec,
    Scenario,
    apply_case,
    bundled_scenario,
    load_scenario,
)
from .tbg import ConvergenceBound, TbgSpec

__version__ = "0.1.0"

__all__ = [
    "AgentCompromiseState",
    "AgentObjectiveState",
    "AgentSpec",
    "BACKEND",
    "CASE_PRESETS",
    "ConvergenceBound",
    "DispatchSolution",
    "EtmParams",
    "EtmState",
    "HAVE_COMPILED",
    "IdealState",
    "Interval",
    "MetricsBundle",
    "Network",
    "PreferenceIndex",
    "Quadratic",
    "ReferenceSolution",
    "ScaledQuadratic",
    "Scenario",
    "SimulationRun",
    "TbgSpec",
    "Technical",
    "apply_case",
    "build_network",
    "bundled_scenario",
    "cycle_adjacency",
    "initialize_run",
    "load_scenario",
    "pareto_check",
    "run_algorithm1",
    "solve_dispatch",
    "solve_reference",
    "step_simulation",
]
