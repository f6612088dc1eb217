"""Timing comparison of the numba and numpy kernel builds.

Runs the minimax-gap solve over a batch of random subsets and the grid
verification scan on both backends.  Usage:

    python benchmarks/bench_lp.py [--n 40] [--m 12] [--repeats 200]

The first numba call compiles; it is excluded by a warmup pass.
"""

import argparse
import time

import numpy as np

from actuplace import backend
from actuplace.generate import GenSpec, generate_instance
from actuplace.kernels import grid_min_gap
from actuplace.lp import solve_minimax_gap


def bench_lp(inst, subsets, repeats):
    t0 = time.perf_counter()
    for _ in range(repeats):
        for s in subsets:
            solve_minimax_gap(inst, s)
    return (time.perf_counter() - t0) / (repeats * len(subsets))


def bench_grid(inst, subset, repeats):
    Us = inst.U[:, list(subset)]
    lo = inst.f_lower[list(subset)]
    hi = inst.f_upper[list(subset)]
    t0 = time.perf_counter()
    for _ in range(repeats):
        grid_min_gap(inst.psi, Us, lo, hi, 0.1)
    return (time.perf_counter() - t0) / repeats


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=40)
    ap.add_argument("--m", type=int, default=12)
    ap.add_argument("--repeats", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    inst = generate_instance(
        GenSpec(n=args.n, m=args.m, seed=args.seed), rng)
    subsets = [(), (0,), (0, 1), (0, 1, 2),
               tuple(range(min(6, args.m)))]
    grid_subset = (0, 1)

    names = ["numpy"] + (["numba"] if backend.HAS_NUMBA else [])
    if not backend.HAS_NUMBA:
        print("numba not installed; timing the numpy build only")

    results = {}
    for name in names:
        backend.set_backend(name)
        # warmup triggers jit compilation so it stays out of the timing
        solve_minimax_gap(inst, (0, 1))
        grid_min_gap(inst.psi, inst.U[:, :1],
                     inst.f_lower[:1], inst.f_upper[:1], 0.5)
        lp_t = bench_lp(inst, subsets, args.repeats)
        gr_t = bench_grid(inst, grid_subset, max(1, args.repeats // 10))
        results[name] = (lp_t, gr_t)
        print("%-6s  minimax solve: %8.3f ms   grid scan (k=2, 0.1 step): %8.1f ms"
              % (name, lp_t * 1e3, gr_t * 1e3))

    if len(results) == 2:
        lp_s = results["numpy"][0] / results["numba"][0]
        gr_s = results["numpy"][1] / results["numba"][1]
        print("numba speedup: %.1fx on the solver, %.1fx on the grid scan"
              % (lp_s, gr_s))


if __name__ == "__main__":
    main()
