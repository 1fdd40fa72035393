"""Command-line front end.

Exit codes: 0 on success, 2 on scenario parse/validation errors, 1 on any
other failure (divergence, mismatch beyond tolerance).
"""

import dataclasses
import json
import pathlib
import sys
import time

import click
import numpy as np

from . import kernels
from .dynamics import run_algorithm1
from .errors import DispatchError, ParseError, ValidationError
from .reference import solve_reference
from .report import metrics_summary, write_events_csv, write_metrics_json, write_trajectory_csv
from .scenario import CASE_PRESETS, apply_case, bundled_scenario, load_scenario


class _ScenarioError(click.ClickException):
    """Parse or validation failure; exits with code 2."""

    exit_code = 2


def _load(scenario_path, case):
    sc = bundled_scenario() if scenario_path is None else load_scenario(scenario_path)
    if case:
        sc = apply_case(sc, case)
    return sc


def _scenario_options(fn):
    fn = click.option(
        "--scenario",
        "scenario_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="Scenario YAML (defaults to the bundled six-agent benchmark).",
    )(fn)
    fn = click.option(
        "--case",
        type=click.Choice(sorted(CASE_PRESETS)),
        default=None,
        help="Apply a benchmark case preset (generator and trigger kinds).",
    )(fn)
    return fn


@click.group()
def main():
    """Event-triggered prescribed-time distributed dispatch simulator."""


@main.command()
@_scenario_options
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory for trajectory.csv, events.csv, metrics.json.")
@click.option("--step", type=float, default=None, help="Integrator step size.")
@click.option("--window", type=float, default=None, help="Metrics window length.")
@click.option("--t-end", type=float, default=None, help="Simulation horizon.")
@click.option("--backend", type=click.Choice(["python", "cython"]), default=None)
def run(scenario_path, case, out, step, window, t_end, backend):
    """Simulate a scenario and report the run metrics."""
    try:
        sc = _load(scenario_path, case)
        overrides = {}
        if step is not None:
            overrides["h"] = step
        if window is not None:
            overrides["metrics_window"] = window
        if t_end is not None:
            overrides["t_end"] = t_end
        if overrides:
            sc = dataclasses.replace(sc, **overrides)
        t0 = time.perf_counter()
        result = run_algorithm1(sc, backend=backend)
        elapsed = time.perf_counter() - t0
    except (ParseError, ValidationError) as exc:
        raise _ScenarioError(str(exc)) from None
    except DispatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    summary = metrics_summary(result)
    summary["wall_time_s"] = round(elapsed, 3)
    summary["backend"] = backend or kernels.BACKEND
    if out:
        outdir = pathlib.Path(out)
        outdir.mkdir(parents=True, exist_ok=True)
        write_trajectory_csv(result, outdir / "trajectory.csv")
        write_events_csv(result, outdir / "events.csv")
        write_metrics_json(result, outdir / "metrics.json")
        summary["output_dir"] = str(outdir)
    click.echo(json.dumps(summary, indent=2))


@main.command()
@_scenario_options
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="Write the JSON report to a file as well.")
def oracle(scenario_path, case, out):
    """Solve the centralized references for a scenario."""
    try:
        sc = _load(scenario_path, case)
        ref = solve_reference(sc)
    except (ParseError, ValidationError) as exc:
        raise _ScenarioError(str(exc)) from None
    except DispatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    doc = {
        "scenario": sc.name,
        "total_demand": sc.total_demand,
        "per_objective": [
            {
                "x_star": s.x_star.tolist(),
                "multiplier": s.multiplier,
                "active_bounds": list(s.active_bounds),
                "objective_value": s.objective_value,
            }
            for s in ref.per_objective
        ],
        "ideal_x": ref.ideal_x.tolist(),
        "ideal_values": ref.ideal_values.tolist(),
        "weights": ref.weights.tolist(),
        "compromise": {
            "x_star": ref.compromise.x_star.tolist(),
            "multiplier": ref.compromise.multiplier,
            "active_bounds": list(ref.compromise.active_bounds),
            "objective_value": ref.compromise.objective_value,
        },
        "kkt": dataclasses.asdict(ref.kkt),
    }
    text = json.dumps(doc, indent=2)
    if out:
        pathlib.Path(out).write_text(text + "\n")
    click.echo(text)


@main.command()
@_scenario_options
@click.option("--tol", type=float, default=1e-3,
              help="Max-norm tolerance on the final compromise allocation.")
@click.option("--step", type=float, default=None, help="Integrator step size.")
@click.option("--t-end", type=float, default=None, help="Simulation horizon.")
def compare(scenario_path, case, tol, step, t_end):
    """Run the simulation and check it against the centralized solution."""
    try:
        sc = _load(scenario_path, case)
        overrides = {}
        if step is not None:
            overrides["h"] = step
        if t_end is not None:
            overrides["t_end"] = t_end
        if overrides:
            sc = dataclasses.replace(sc, **overrides)
        ref = solve_reference(sc)
        result = run_algorithm1(sc)
    except (ParseError, ValidationError) as exc:
        raise _ScenarioError(str(exc)) from None
    except DispatchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    dist = float(np.max(np.abs(result.x - ref.compromise.x_star)))
    result.metrics.distance_to_oracle = dist
    click.echo(
        json.dumps(
            {
                "scenario": sc.name,
                "x_final": result.x.tolist(),
                "x_star": ref.compromise.x_star.tolist(),
                "distance_max_kw": dist,
                "tolerance_kw": tol,
                "ok": dist <= tol,
            },
            indent=2,
        )
    )
    if dist > tol:
        sys.exit(1)


@main.command()
@click.argument("scenario_file", type=click.Path(exists=True, dir_okay=False))
def validate(scenario_file):
    """Validate a scenario file; exits nonzero with the offending field."""
    try:
        sc = load_scenario(scenario_file)
    except (ParseError, ValidationError) as exc:
        raise _ScenarioError(str(exc)) from None
    click.echo(f"OK: {sc.name} ({sc.n_agents} agents, {sc.n_objectives} objectives)")


if __name__ == "__main__":
    main()
