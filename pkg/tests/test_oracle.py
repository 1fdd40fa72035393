import numpy as np
import pytest

from etdispatch.errors import GridTooCoarse, InfeasibleDemand, NonMonotoneGradient
from etdispatch.objectives import (
    SQUARE_OF_SQUARE,
    Quadratic,
    Technical,
    eval_objective,
    grad_objective,
)
from etdispatch.oracle import (
    NetworkObjectives,
    ideal_point,
    pareto_check,
    projected_gradient_dispatch,
    solve_dispatch,
    verify_kkt,
)
from etdispatch.projection import Interval

# Benchmark reference solutions, frozen from two independent solver routes
# (equal-marginal bisection cross-checked against projected gradient).
ECO_X = [140.0, 132.68955378, 165.0, 150.0, 128.35844644, 130.0]
ECO_LAMBDA = 29.368256
ECO_F = 12956.1591
ENV_X = [138.78659491, 145.98881298, 165.0, 150.0, 116.27259250, 130.0]
ENV_LAMBDA = 9.968262
TEC_X = [134.22665096, 160.64949533, 165.0, 146.12519172, 126.25135266, 113.79530933]
TEC_LAMBDA = 88.453302
COMP_X = [
    134.82399269,
    161.75637919,
    165.0,
    142.55965672,
    127.94394968,
    113.96402172,
]
COMP_LAMBDA = 59.36668522040111
COMP_U = 7066.584469637749

IDEAL_TEC_F = [100.0, 27.2, 0.0, 709.2, 122.0, 256.5]


def test_per_objective_dispatch(reference):
    sols = reference.per_objective
    assert np.allclose(sols[0].x_star, ECO_X, atol=1e-6)
    assert sols[0].multiplier == pytest.approx(ECO_LAMBDA, abs=1e-4)
    assert sols[0].objective_value == pytest.approx(ECO_F, abs=1e-2)
    assert np.allclose(sols[1].x_star, ENV_X, atol=1e-6)
    assert sols[1].multiplier == pytest.approx(ENV_LAMBDA, abs=1e-4)
    assert np.allclose(sols[2].x_star, TEC_X, atol=1e-6)
    assert sols[2].multiplier == pytest.approx(TEC_LAMBDA, abs=1e-4)


def test_per_objective_active_bounds(reference):
    eco = reference.per_objective[0].active_bounds
    assert eco[0] == "upper" and eco[2] == "upper" and eco[3] == "upper"
    assert eco[5] == "upper"
    assert eco[1] == "interior" and eco[4] == "interior"


def test_compromise_dispatch(reference):
    comp = reference.compromise
    assert np.allclose(comp.x_star, COMP_X, atol=1e-6)
    assert comp.multiplier == pytest.approx(COMP_LAMBDA, abs=1e-6)
    assert comp.objective_value == pytest.approx(COMP_U, abs=1e-4)
    # only agent 3 (index 2) rides a bound at the compromise
    assert comp.active_bounds[2] == "upper"
    assert all(
        flag == "interior" for i, flag in enumerate(comp.active_bounds) if i != 2
    )


def test_compromise_balances_exactly(table1, reference):
    assert float(reference.compromise.x_star.sum()) == pytest.approx(
        table1.total_demand, abs=1e-9
    )


def test_kkt_report(reference):
    assert reference.kkt.ok(1e-6)
    assert reference.kkt.balance_residual < 1e-9


def test_kkt_detects_perturbation(table1, reference):
    from dataclasses import replace
    from functools import partial

    from etdispatch.objectives import grad_preference

    grads = [partial(grad_preference, u) for u in reference.preferences]
    x = reference.compromise.x_star.copy()
    x[0] += 0.5
    x[1] -= 0.5  # keep the balance, break stationarity
    bad = replace(reference.compromise, x_star=x)
    report = verify_kkt(bad, grads, table1.bounds, table1.total_demand)
    assert report.stationarity_residual > 1e-2
    assert not report.ok(1e-3)


def test_ideal_points(table1, reference):
    # every curve is increasing on its interval except unit 3's deviation
    # penalty, whose preferred point 135 kW is interior
    lo = np.array([a.p_min for a in table1.agents])
    expected_x = np.tile(lo, (3, 1))
    expected_x[2, 2] = 135.0
    assert np.allclose(reference.ideal_x, expected_x, atol=1e-9)
    assert np.allclose(reference.ideal_values[2], IDEAL_TEC_F, atol=1e-9)


def test_ideal_point_branches():
    f = Quadratic(1.0, -10.0, 25.0)  # minimum at x = 5
    x, v = ideal_point(f, Interval(0.0, 10.0))
    assert x == pytest.approx(5.0, abs=1e-9)
    assert v == pytest.approx(0.0, abs=1e-9)
    x, v = ideal_point(f, Interval(6.0, 10.0))
    assert x == 6.0
    x, v = ideal_point(f, Interval(0.0, 4.0))
    assert x == 4.0


def test_weights_rows(reference):
    expected = np.array(
        [
            [0.4495177, 0.4702288, 0.5582567, 0.4126467, 0.4947569, 0.4449377],
            [0.1465170, 0.1563267, 0.1599012, 0.1112916, 0.1379783, 0.1362509],
            [0.4039653, 0.3734446, 0.2818421, 0.4760617, 0.3672648, 0.4188114],
        ]
    )
    assert np.allclose(reference.weights, expected, atol=1e-6)
    assert np.allclose(reference.weights.sum(axis=0), 1.0, atol=1e-12)


def test_infeasible_demand_raises():
    grads = [lambda x: x, lambda x: x]
    bounds = [Interval(0.0, 1.0), Interval(0.0, 1.0)]
    with pytest.raises(InfeasibleDemand):
        solve_dispatch(grads, bounds, 3.0)
    with pytest.raises(InfeasibleDemand):
        projected_gradient_dispatch(grads, bounds, -1.0)


def test_nonmonotone_gradient_rejected():
    f = Technical(1.0, 100.0, form=SQUARE_OF_SQUARE)  # concave near zero
    grads = [lambda x: grad_objective(f, x), lambda x: x]
    bounds = [Interval(0.0, 5.0), Interval(0.0, 5.0)]
    with pytest.raises(NonMonotoneGradient):
        solve_dispatch(grads, bounds, 5.0)


def test_solver_cross_validation_sample():
    """Two independent solver routes agree on randomized instances."""
    rng = np.random.default_rng(123)
    for _ in range(10):
        n = int(rng.integers(2, 9))
        objs = [
            Quadratic(rng.uniform(0.1, 1.0), rng.uniform(-5, 5), 0.0)
            for _ in range(n)
        ]
        lo = rng.uniform(0.0, 10.0, size=n)
        hi = lo + rng.uniform(1.0, 20.0, size=n)
        bounds = [Interval(a, b) for a, b in zip(lo, hi)]
        demand = float(rng.uniform(lo.sum(), hi.sum()))
        grads = [
            (lambda f: (lambda x: grad_objective(f, x)))(f) for f in objs
        ]
        x_wf = solve_dispatch(grads, bounds, demand).x_star
        x_pg = projected_gradient_dispatch(grads, bounds, demand, tol=1e-9)
        assert np.max(np.abs(x_wf - x_pg)) < 1e-6


def _toy_network(toy2x2, weights):
    return NetworkObjectives(
        objectives=tuple(a.objectives for a in toy2x2.agents),
        weights=weights,
        bounds=toy2x2.bounds,
        demand=toy2x2.total_demand,
    )


def test_pareto_check_toy(toy2x2):
    from etdispatch.reference import solve_reference

    ref = solve_reference(toy2x2)
    net = _toy_network(toy2x2, ref.weights.T)
    assert pareto_check(ref.compromise.x_star, net, grid=0.01)

    # find a grid point that some other point dominates, and confirm the
    # check flags it
    xs = np.arange(4.0, 16.0 + 0.005, 0.01)
    costs = np.array(
        [[net.cost(k, np.array([x1, 20.0 - x1])) for k in range(2)] for x1 in xs]
    )
    dominated = None
    for idx in [0, len(xs) - 1]:  # segment endpoints are the usual suspects
        better = np.all(costs <= costs[idx] - 1e-6, axis=1)
        if better.any():
            dominated = np.array([xs[idx], 20.0 - xs[idx]])
            break
    assert dominated is not None, "toy instance has no dominated endpoint"
    assert not pareto_check(dominated, net, grid=0.01)


def test_pareto_check_grid_too_coarse(toy2x2):
    from etdispatch.reference import solve_reference

    ref = solve_reference(toy2x2)
    net = _toy_network(toy2x2, ref.weights.T)
    with pytest.raises(GridTooCoarse):
        pareto_check(ref.compromise.x_star, net, grid=5.0)


def test_pareto_check_three_agents():
    # three identical agents: the symmetric split is Pareto optimal
    objs = tuple((Quadratic(1.0, 0.0, 0.0), Quadratic(2.0, 0.0, 1.0)) for _ in range(3))
    net = NetworkObjectives(
        objectives=objs,
        weights=np.full((3, 2), 0.5),
        bounds=tuple(Interval(0.0, 4.0) for _ in range(3)),
        demand=6.0,
    )
    assert pareto_check(np.array([2.0, 2.0, 2.0]), net, grid=0.25)
