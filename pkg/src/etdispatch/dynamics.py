"""Three-layer distributed flow and its fixed-step event-triggered driver.

Layers: per-objective subproblem flows (decision, consensus, balance
variables), per-objective ideal-point descent, and the compromise flow
minimizing the preference index.  All layers share one clock and one
classical 4th-order stepping scheme; broadcasts are held constant within a
step and trigger predicates are evaluated on the grid.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import etm as etm_mod
from . import kernels, tbg
from ._kernel_py import _gradval, _value
from .errors import InvalidPrescribedTimes, InvariantViolation, NonFiniteState
from .etm import DYNAMIC_PAPER, DYNAMIC_PRIOR, STATIC, EtmParams, EtmState
from .graph import Network, build_network
from .objectives import (
    ObjectiveFn,
    PreferenceIndex,
    convexity_modulus,
    grad_coeffs,
    grad_objective,
    grad_preference,
    value_coeffs,
)
from .projection import Interval, project_tangent
from .scenario import Scenario, validate_scenario

log = logging.getLogger(__name__)

_KIND_CODE = {DYNAMIC_PAPER: 0, STATIC: 1, DYNAMIC_PRIOR: 2}


# ---------------------------------------------------------------------------
# reference right-hand sides (single agent, used by tests and parity checks)


@dataclass
class AgentObjectiveState:
    """Subproblem-layer state of one (agent, objective) channel."""

    xbar: float
    y: float
    z: float
    etm: EtmState
    omega: float = 0.0


@dataclass
class IdealState:
    xhat: float
    ideal_value: float = 0.0


@dataclass
class AgentCompromiseState:
    x: float
    nu: float
    mu: float
    etm: EtmState


def subproblem_rhs(
    state: AgentObjectiveState,
    f: ObjectiveFn,
    bounds: Interval,
    d_i: float,
    gain: float,
    neighbor_broadcasts: Sequence[Tuple[float, float]],
) -> Tuple[float, float, float]:
    """Derivatives of (xbar, y, z); consensus terms use held broadcasts."""
    ybar_i = state.etm.last_broadcast
    cons = sum(a * (ybar_i - yb) for a, yb in neighbor_broadcasts)
    dxbar = project_tangent(
        bounds, state.xbar, gain * (state.y - grad_objective(f, state.xbar))
    )
    dy = gain * (-cons - state.z + d_i - state.xbar)
    dz = gain * cons
    return dxbar, dy, dz


def ideal_rhs(state: IdealState, f: ObjectiveFn, bounds: Interval, gain: float) -> float:
    """Projected negative gradient descent toward the local ideal point."""
    return project_tangent(bounds, state.xhat, -gain * grad_objective(f, state.xhat))


def compromise_rhs(
    state: AgentCompromiseState,
    preference: PreferenceIndex,
    bounds: Interval,
    d_i: float,
    gain: float,
    neighbor_broadcasts: Sequence[Tuple[float, float]],
) -> Tuple[float, float, float]:
    """Derivatives of (x, nu, mu); mirrors the subproblem with grad u."""
    nubar_i = state.etm.last_broadcast
    cons = sum(a * (nubar_i - nb) for a, nb in neighbor_broadcasts)
    dx = project_tangent(
        bounds, state.x, gain * (state.nu - grad_preference(preference, state.x))
    )
    dnu = gain * (-cons - state.mu + d_i - state.x)
    dmu = gain * cons
    return dx, dnu, dmu


# ---------------------------------------------------------------------------
# Lyapunov-rate diagnostics (bound values only, never control logic)


def lyapunov_rate(
    lambda2: float,
    lambdaN: float,
    lii: np.ndarray,
    params: Sequence[EtmParams],
    m_min: float,
) -> Tuple[float, float]:
    """Conservative decay rate (kappa / theta2) of one layer's Lyapunov bound.

    params holds one entry per agent (all identical in the benchmark).
    """
    varsigma = params[0].varsigma
    beta_max = max(p.beta for p in params)
    psi_d = min(p.phi - (1.0 - p.delta) / p.alpha for p in params)
    min_term = min(1.0 / (2.0 * p.varsigma) + l for p, l in zip(params, lii))
    min_alpha_term = min(
        p.alpha * (1.0 / (2.0 * p.varsigma) + l) for p, l in zip(params, lii)
    )
    psi_y = max(
        2.0 + lambdaN / min_term,
        2.0 * lambdaN * (1.0 - beta_max) / (psi_d * min_alpha_term),
    )
    kappa = min(
        m_min - 3.0 * varsigma,
        lambda2 * (1.0 - beta_max) / (2.0 * psi_y) - 3.0 * varsigma,
        varsigma / 2.0,
        psi_d / 2.0,
    )
    theta2 = max(1.0, 0.5 + 4.0 * varsigma, 1.0 / (2.0 * lambda2) + 4.0 * varsigma)
    return kappa, theta2


# ---------------------------------------------------------------------------
# metrics


@dataclass
class MetricsBundle:
    """Aggregated diagnostics of one simulation run."""

    window: float
    times: np.ndarray
    imbalance: np.ndarray
    x_samples: np.ndarray
    xbar_samples: np.ndarray
    xhat_samples: np.ndarray
    omega_samples: np.ndarray
    ce_at_tpre3: float
    omega_at_tpre1: Optional[np.ndarray]
    counts_sub: np.ndarray
    counts_comp: np.ndarray
    counts_sub_window: np.ndarray
    counts_comp_window: np.ndarray
    min_inter_sub: np.ndarray
    min_inter_comp: np.ndarray
    eta_min: float
    eta_bound_ratio_min: float
    max_sum_z: float
    max_sum_mu: float
    max_weight_dev: float
    feas_violation_max: float
    distance_to_oracle: float = math.nan

    def agent_window_counts(self) -> np.ndarray:
        """Per-agent event totals in the window (all layers combined)."""
        return self.counts_sub_window.sum(axis=0) + self.counts_comp_window

    def total_window_count(self) -> int:
        return int(self.counts_sub_window.sum() + self.counts_comp_window.sum())


# ---------------------------------------------------------------------------
# simulation run


@dataclass
class SimulationRun:
    scenario: Scenario
    network: Network
    t: float
    step_index: int
    # state arrays: (K, N) for the per-objective layers, (N,) for compromise
    xbar: np.ndarray
    y: np.ndarray
    z: np.ndarray
    eta1: np.ndarray
    ybar: np.ndarray
    xhat: np.ndarray
    x: np.ndarray
    nu: np.ndarray
    mu: np.ndarray
    eta2: np.ndarray
    nubar: np.ndarray
    events: List[tuple] = field(default_factory=list)
    metrics: Optional[MetricsBundle] = None
    _internals: dict = field(default_factory=dict, repr=False)

    @property
    def n_agents(self) -> int:
        return self.scenario.n_agents

    @property
    def n_objectives(self) -> int:
        return self.scenario.n_objectives

    def omega(self) -> np.ndarray:
        """Live weight estimates from the current subproblem states."""
        vpoly = self._internals["vpoly"]
        fx = np.abs(_value(vpoly, self.xbar))
        tot = fx.sum(axis=0)
        return fx / tot


def _etm_arrays(params: Sequence[EtmParams], shape) -> dict:
    def fill(attr):
        vals = np.array([getattr(p, attr) for p in params])
        if len(shape) == 2:
            return np.broadcast_to(vals[:, None], shape).copy()
        return np.broadcast_to(vals, shape).copy() if vals.size == 1 else np.full(
            shape, vals[0]
        )

    return {
        "alpha": fill("alpha"),
        "phi": fill("phi"),
        "delta": fill("delta"),
        "beta": fill("beta"),
        "inv2s": np.reciprocal(2.0 * fill("varsigma")),
        "eta0": fill("eta0"),
    }


def initialize_run(scenario: Scenario, backend: str = None) -> SimulationRun:
    """Build the run per the initialization block: z(0)=0, mu(0)=0, eta(0)>0,
    feasible decision states, and an initial broadcast from every channel."""
    if scenario.tbg_comp.t_pre <= max(scenario.tbg_sub.t_pre, scenario.tbg_ideal.t_pre):
        raise InvalidPrescribedTimes(
            f"compromise prescribed time {scenario.tbg_comp.t_pre} must exceed "
            f"{max(scenario.tbg_sub.t_pre, scenario.tbg_ideal.t_pre)}"
        )
    validate_scenario(scenario)
    network = build_network(scenario.adjacency)
    n, k = scenario.n_agents, scenario.n_objectives

    x0 = scenario.x0
    xbar = np.tile(x0, (k, 1))
    y = np.full((k, n), scenario.y0, dtype=float)
    z = np.zeros((k, n))
    xhat = np.tile(x0, (k, 1))
    x = x0.copy()
    nu = np.full(n, scenario.nu0, dtype=float)
    mu = np.zeros(n)

    sub = _etm_arrays(scenario.etm_sub, (k, n))
    comp = _etm_arrays([scenario.etm_comp] * n, (n,))
    eta1 = sub["eta0"].copy()
    eta2 = comp["eta0"].copy()

    lii = network.degrees
    run = SimulationRun(
        scenario=scenario,
        network=network,
        t=0.0,
        step_index=0,
        xbar=xbar,
        y=y,
        z=z,
        eta1=eta1,
        ybar=y.copy(),
        xhat=xhat,
        x=x,
        nu=nu,
        mu=mu,
        eta2=eta2,
        nubar=nu.copy(),
    )

    gpoly = np.empty((k, n, 4))
    vpoly = np.empty((k, n, 5))
    for i, agent in enumerate(scenario.agents):
        for kk, f in enumerate(agent.objectives):
            gpoly[kk, i] = grad_coeffs(f)
            vpoly[kk, i] = value_coeffs(f)

    # conservative-bound report for the trigger parameters (warning only)
    m_min = [
        min(
            convexity_modulus(a.objectives[kk], a.bounds)
            for a in scenario.agents
        )
        for kk in range(k)
    ]
    for kk in range(k):
        etm_mod.check_varsigma(
            f"subproblem objective {kk}",
            scenario.etm_sub[kk].varsigma,
            m_min[kk],
            network.lambda2,
            network.lambdaN,
            [scenario.etm_sub[kk]] * n,
        )

    run._internals = {
        "step_fn": kernels.get_step(backend),
        "gpoly": gpoly,
        "vpoly": vpoly,
        "lii": lii,
        "lo": np.array([a.p_min for a in scenario.agents], dtype=float),
        "hi": np.array([a.p_max for a in scenario.agents], dtype=float),
        "d": scenario.demands,
        "sub": sub,
        "comp": comp,
        "kind1": _KIND_CODE[scenario.etm_kind_sub],
        "kind2": _KIND_CODE[scenario.etm_kind_comp],
        "fired1": np.zeros((k, n), dtype=np.uint8),
        "fired2": np.zeros(n, dtype=np.uint8),
        # eta lower-bound decay rates and running gauge integrals
        "eta_rate1": sub["phi"] + sub["delta"] / sub["alpha"],
        "eta_rate2": comp["phi"] + comp["delta"] / comp["alpha"],
        "gamma1": 0.0,
        "gamma3": 0.0,
        "last_trig1": np.zeros((k, n)),
        "last_trig2": np.zeros(n),
        "min_inter1": np.full((k, n), np.inf),
        "min_inter2": np.full(n, np.inf),
        "counts1": np.ones((k, n), dtype=np.int64),
        "counts2": np.ones(n, dtype=np.int64),
        "counts1_w": np.ones((k, n), dtype=np.int64),
        "counts2_w": np.ones(n, dtype=np.int64),
        "eta_min": math.inf,
        "eta_ratio_min": math.inf,
        "max_sum_z": 0.0,
        "max_sum_mu": 0.0,
        "max_weight_dev": 0.0,
        "feas_max": 0.0,
        "ce_at_tpre3": math.nan,
        "omega_at_tpre1": None,
        "samples": [],
    }

    # initial broadcast from every channel (the ell = 0 event)
    for kk in range(k):
        for i in range(n):
            run.events.append((0.0, "sub", i, kk, float(y[kk, i])))
    for i in range(n):
        run.events.append((0.0, "compromise", i, None, float(nu[i])))
    _record_sample(run)
    return run


def _record_sample(run: SimulationRun) -> None:
    imbalance = float(run.scenario.total_demand - run.x.sum())
    run._internals["samples"].append(
        (
            run.t,
            imbalance,
            run.x.copy(),
            run.xbar.copy(),
            run.xhat.copy(),
            run.omega(),
        )
    )


def step_simulation(run: SimulationRun, h: float) -> SimulationRun:
    """Advance every layer by one step, then evaluate triggers and log."""
    if h <= 0:
        raise ValueError("step size must be positive")
    sc = run.scenario
    it = run._internals
    t = run.t
    gains = np.array(
        [
            tbg.stage_gains(sc.tbg_sub, t, h),
            tbg.stage_gains(sc.tbg_ideal, t, h),
            tbg.stage_gains(sc.tbg_comp, t, h),
        ]
    )
    sub, comp = it["sub"], it["comp"]
    it["step_fn"](
        h,
        gains,
        run.xbar,
        run.y,
        run.z,
        run.eta1,
        run.ybar,
        run.xhat,
        run.x,
        run.nu,
        run.mu,
        run.eta2,
        run.nubar,
        run.network.adjacency,
        it["lii"],
        it["lo"],
        it["hi"],
        it["d"],
        it["gpoly"],
        it["vpoly"],
        sc.p_norm,
        1e-12,
        sub["alpha"],
        sub["phi"],
        sub["delta"],
        sub["beta"],
        sub["inv2s"],
        it["kind1"],
        comp["alpha"],
        comp["phi"],
        comp["delta"],
        comp["beta"],
        comp["inv2s"],
        it["kind2"],
        it["fired1"],
        it["fired2"],
    )
    t_next = t + h
    run.t = t_next
    run.step_index += 1

    if not (np.isfinite(run.y).all() and np.isfinite(run.nu).all()):
        raise NonFiniteState(f"state diverged at t = {t_next}")

    # conservation and feasibility diagnostics
    it["max_sum_z"] = max(it["max_sum_z"], float(np.abs(run.z.sum(axis=1)).max()))
    it["max_sum_mu"] = max(it["max_sum_mu"], abs(float(run.mu.sum())))
    feas = max(
        float((it["lo"] - run.x).max()),
        float((run.x - it["hi"]).max()),
        float((it["lo"] - run.xbar).max()),
        float((run.xbar - it["hi"]).max()),
        0.0,
    )
    it["feas_max"] = max(it["feas_max"], feas)
    if feas > 1e-9:
        raise InvariantViolation(f"feasibility violated by {feas} at t = {t_next}")

    # trigger-variable positivity and its exponential floor
    it["gamma1"] += tbg.gauge_increment(sc.tbg_sub, t, t_next)
    it["gamma3"] += tbg.gauge_increment(sc.tbg_comp, t, t_next)
    if it["kind1"] != _KIND_CODE[STATIC]:
        emin = float(run.eta1.min())
        it["eta_min"] = min(it["eta_min"], emin)
        if emin <= 0.0:
            raise InvariantViolation(f"eta1 reached {emin} at t = {t_next}")
        floor = sub["eta0"] * np.exp(-it["eta_rate1"] * it["gamma1"])
        it["eta_ratio_min"] = min(
            it["eta_ratio_min"], float((run.eta1 / floor).min())
        )
    if it["kind2"] != _KIND_CODE[STATIC]:
        emin = float(run.eta2.min())
        it["eta_min"] = min(it["eta_min"], emin)
        if emin <= 0.0:
            raise InvariantViolation(f"eta2 reached {emin} at t = {t_next}")
        floor = comp["eta0"] * np.exp(-it["eta_rate2"] * it["gamma3"])
        it["eta_ratio_min"] = min(
            it["eta_ratio_min"], float((run.eta2 / floor).min())
        )

    # event bookkeeping
    fired1, fired2 = it["fired1"], it["fired2"]
    in_window = t_next <= sc.metrics_window + 1e-12
    if fired1.any():
        ks, is_ = np.nonzero(fired1)
        for kk, i in zip(ks.tolist(), is_.tolist()):
            run.events.append((t_next, "sub", i, kk, float(run.ybar[kk, i])))
        gap = t_next - it["last_trig1"][ks, is_]
        it["min_inter1"][ks, is_] = np.minimum(it["min_inter1"][ks, is_], gap)
        it["last_trig1"][ks, is_] = t_next
        it["counts1"][ks, is_] += 1
        if in_window:
            it["counts1_w"][ks, is_] += 1
    if fired2.any():
        (is_,) = np.nonzero(fired2)
        for i in is_.tolist():
            run.events.append((t_next, "compromise", i, None, float(run.nubar[i])))
        gap = t_next - it["last_trig2"][is_]
        it["min_inter2"][is_] = np.minimum(it["min_inter2"][is_], gap)
        it["last_trig2"][is_] = t_next
        it["counts2"][is_] += 1
        if in_window:
            it["counts2_w"][is_] += 1

    # phase-boundary captures
    if abs(t_next - sc.tbg_sub.t_pre) < 1e-12 and it["omega_at_tpre1"] is None:
        it["omega_at_tpre1"] = run.omega()
    if abs(t_next - sc.tbg_comp.t_pre) < 1e-12:
        it["ce_at_tpre3"] = float(sc.total_demand - run.x.sum())

    if run.step_index % sc.output_stride == 0:
        omega = run.omega()
        dev = abs(float(omega.sum(axis=0).max()) - 1.0)
        it["max_weight_dev"] = max(it["max_weight_dev"], dev)
        _record_sample(run)
    return run


def _build_grid(t_end: float, h: float, breakpoints: Sequence[float]) -> np.ndarray:
    """Uniform-ish grid hitting every breakpoint exactly."""
    marks = sorted({0.0, t_end, *(b for b in breakpoints if 0.0 < b < t_end)})
    pieces = [np.array([0.0])]
    for a, b in zip(marks[:-1], marks[1:]):
        n = max(1, round((b - a) / h))
        pieces.append(np.linspace(a, b, n + 1)[1:])
    return np.concatenate(pieces)


def run_algorithm1(scenario: Scenario, backend: str = None) -> SimulationRun:
    """Execute all phases on one clock and return the completed run.

    The compromise layer consumes live weight and ideal-value estimates from
    the start; the prescribed-time ordering guarantees those inputs settle
    before the compromise settling time.
    """
    run = initialize_run(scenario, backend=backend)
    grid = _build_grid(
        scenario.t_end,
        scenario.h,
        [
            scenario.tbg_sub.t_pre,
            scenario.tbg_ideal.t_pre,
            scenario.tbg_comp.t_pre,
            scenario.metrics_window,
        ],
    )
    for j in range(len(grid) - 1):
        step_simulation(run, grid[j + 1] - grid[j])
        run.t = float(grid[j + 1])  # pin the clock to the exact grid point
    run.metrics = _finalize_metrics(run)
    return run


def _finalize_metrics(run: SimulationRun) -> MetricsBundle:
    it = run._internals
    samples = it["samples"]
    times = np.array([s[0] for s in samples])
    return MetricsBundle(
        window=run.scenario.metrics_window,
        times=times,
        imbalance=np.array([s[1] for s in samples]),
        x_samples=np.array([s[2] for s in samples]),
        xbar_samples=np.array([s[3] for s in samples]),
        xhat_samples=np.array([s[4] for s in samples]),
        omega_samples=np.array([s[5] for s in samples]),
        ce_at_tpre3=it["ce_at_tpre3"],
        omega_at_tpre1=it["omega_at_tpre1"],
        counts_sub=it["counts1"].copy(),
        counts_comp=it["counts2"].copy(),
        counts_sub_window=it["counts1_w"].copy(),
        counts_comp_window=it["counts2_w"].copy(),
        min_inter_sub=it["min_inter1"].copy(),
        min_inter_comp=it["min_inter2"].copy(),
        eta_min=it["eta_min"],
        eta_bound_ratio_min=it["eta_ratio_min"],
        max_sum_z=it["max_sum_z"],
        max_sum_mu=it["max_sum_mu"],
        max_weight_dev=it["max_weight_dev"],
        feas_violation_max=it["feas_max"],
    )


def etm_states(run: SimulationRun) -> Tuple[list, list]:
    """Final per-channel trigger bookkeeping records."""
    it = run._internals
    k, n = run.n_objectives, run.n_agents
    sub_states = [
        [
            EtmState(
                eta=float(run.eta1[kk, i]),
                last_broadcast=float(run.ybar[kk, i]),
                last_trigger_time=float(it["last_trig1"][kk, i]),
                trigger_count=int(it["counts1"][kk, i]),
                min_inter_event=float(it["min_inter1"][kk, i]),
            )
            for i in range(n)
        ]
        for kk in range(k)
    ]
    comp_states = [
        EtmState(
            eta=float(run.eta2[i]),
            last_broadcast=float(run.nubar[i]),
            last_trigger_time=float(it["last_trig2"][i]),
            trigger_count=int(it["counts2"][i]),
            min_inter_event=float(it["min_inter2"][i]),
        )
        for i in range(n)
    ]
    return sub_states, comp_states
