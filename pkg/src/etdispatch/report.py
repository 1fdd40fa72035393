"""CSV / JSON output for completed simulation runs."""

import csv
import json
import math

from .dynamics import SimulationRun


def write_trajectory_csv(run: SimulationRun, path) -> None:
    """Strided state samples as t,layer,agent,objective,var,value rows."""
    m = run.metrics
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "layer", "agent", "objective", "var", "value"])
        for s, t in enumerate(m.times):
            for i in range(run.n_agents):
                w.writerow([t, "compromise", i, "", "x", repr(m.x_samples[s, i])])
            for k in range(run.n_objectives):
                for i in range(run.n_agents):
                    w.writerow(
                        [t, "sub", i, k, "xbar", repr(m.xbar_samples[s, k, i])]
                    )
                    w.writerow(
                        [t, "ideal", i, k, "xhat", repr(m.xhat_samples[s, k, i])]
                    )
                    w.writerow(
                        [t, "sub", i, k, "omega", repr(m.omega_samples[s, k, i])]
                    )
            w.writerow([t, "network", "", "", "imbalance", repr(m.imbalance[s])])


def write_events_csv(run: SimulationRun, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "layer", "agent", "objective", "broadcast_value"])
        for t, layer, agent, objective, value in run.events:
            w.writerow(
                [t, layer, agent, "" if objective is None else objective, repr(value)]
            )


def metrics_summary(run: SimulationRun) -> dict:
    """JSON-ready digest of the run's diagnostics."""
    m = run.metrics
    out = {
        "scenario": run.scenario.name,
        "t_end": run.t,
        "steps": run.step_index,
        "window": m.window,
        "final_x": run.x.tolist(),
        "final_imbalance": float(run.scenario.total_demand - run.x.sum()),
        "convergence_error_at_tpre": m.ce_at_tpre3,
        "event_counts": {
            "subproblem": m.counts_sub.tolist(),
            "compromise": m.counts_comp.tolist(),
            "window_per_agent": m.agent_window_counts().tolist(),
            "window_total": m.total_window_count(),
        },
        "min_inter_event": {
            "subproblem": m.min_inter_sub.tolist(),
            "compromise": m.min_inter_comp.tolist(),
        },
        "eta_min": m.eta_min if math.isfinite(m.eta_min) else None,
        "eta_bound_ratio_min": (
            m.eta_bound_ratio_min if math.isfinite(m.eta_bound_ratio_min) else None
        ),
        "max_abs_sum_z": m.max_sum_z,
        "max_abs_sum_mu": m.max_sum_mu,
        "max_weight_deviation": m.max_weight_dev,
        "feasibility_violation_max": m.feas_violation_max,
    }
    if not math.isnan(m.distance_to_oracle):
        out["distance_to_oracle"] = m.distance_to_oracle
    return out


def write_metrics_json(run: SimulationRun, path) -> None:
    with open(path, "w") as fh:
        json.dump(metrics_summary(run), fh, indent=2)
        fh.write("\n")
