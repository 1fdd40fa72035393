"""Compare the compiled and pure-numpy stepping backends.

Usage: python benchmarks/bench_kernels.py [t_end]
"""

import sys
import time

import numpy as np

from etdispatch import bundled_scenario, run_algorithm1
from etdispatch.kernels import HAVE_COMPILED


def time_run(scenario, backend):
    t0 = time.perf_counter()
    run = run_algorithm1(scenario, backend=backend)
    return time.perf_counter() - t0, run


def main():
    t_end = float(sys.argv[1]) if len(sys.argv) > 1 else 5.0
    import dataclasses

    sc = dataclasses.replace(bundled_scenario(), t_end=t_end)
    steps = round(t_end / sc.h)
    print(f"scenario {sc.name}: {sc.n_agents} agents, {sc.n_objectives} "
          f"objectives, {steps} steps of h = {sc.h}")

    wall_py, run_py = time_run(sc, "python")
    print(f"python backend: {wall_py:.2f} s ({1e6 * wall_py / steps:.1f} us/step)")

    if not HAVE_COMPILED:
        print("compiled backend unavailable; skipping")
        return

    wall_cy, run_cy = time_run(sc, "cython")
    print(f"cython backend: {wall_cy:.2f} s ({1e6 * wall_cy / steps:.1f} us/step)")
    print(f"speedup: {wall_py / wall_cy:.1f}x")
    drift = max(
        float(np.max(np.abs(run_py.x - run_cy.x))),
        float(np.max(np.abs(run_py.xbar - run_cy.xbar))),
    )
    print(f"final-state backend difference: {drift:.3e} "
          "(event timing amplifies last-bit rounding; both reach the same equilibrium)")


if __name__ == "__main__":
    main()
