#!/usr/bin/env python3
"""Throughput comparison of the Crank-Nicolson stepping backends.

Runs the same short driven propagation through the numba kernel and the
numpy/scipy fallback and reports per-step timings. Select the default
backend at runtime with ATTOSTM_BACKEND=numba|numpy.
"""

import argparse
import time
import warnings

import numpy as np

from attostm.config import JunctionConfig, LaserConfig
from attostm.grid import desk_grid, reference_grid
from attostm.kernels import available_backends
from attostm.solver import initial_state, propagate, transferred_charge


def bench(grid_name: str, steps: int, repeats: int) -> None:
    cfg = JunctionConfig()
    laser = LaserConfig(field_F1=8.0)
    grid = desk_grid() if grid_name == "desk" else reference_grid()
    state = initial_state(cfg, grid)
    t_end = -400.0 + steps * grid.dt
    print(f"grid={grid_name}: {grid.n_points} points, {steps} steps")
    charges = {}
    for backend in available_backends():
        # one warm-up call covers jit compilation
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            propagate(cfg, laser, grid, -400.0, -400.0 + 32 * grid.dt,
                      probes=(None,), initial=state, backend=backend)
            best = float("inf")
            for _ in range(repeats):
                t0 = time.perf_counter()
                res = propagate(cfg, laser, grid, -400.0, t_end,
                                probes=(None,), initial=state, backend=backend)
                best = min(best, time.perf_counter() - t0)
        charges[backend] = transferred_charge(res.records[0])
        print(f"  {backend:6s}: {best:7.3f} s  "
              f"({best / steps * 1e6:7.1f} us/step)")
    values = list(charges.values())
    if len(values) == 2:
        scale = max(abs(v) for v in values) or 1.0
        print(f"  backend agreement on transferred charge: "
              f"{abs(values[0] - values[1]) / scale:.2e} relative")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--grid", choices=("desk", "reference"), default="desk")
    ap.add_argument("--steps", type=int, default=2000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    bench(args.grid, args.steps, args.repeats)
