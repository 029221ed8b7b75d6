#!/usr/bin/env python3
"""Time the jitted and vectorized replica kernels on the same workload.

    python benchmarks/bench_kernels.py --samples 20000 --methods min_variance borda
    python benchmarks/bench_kernels.py --json results.json

The two paths read identical random streams, so the benchmark also reports
the largest per-replica difference between them.
"""

import argparse
import json
import sys
import time

import numpy as np

from collective_knapsack import kernels
from collective_knapsack.simulator import ScenarioConfig, build_params

WARMUP_SAMPLES = 64


def time_path(params, reps, backend, runs):
    kernels.replica_values(params, reps[:WARMUP_SAMPLES], backend)  # compile / warm caches
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        out = kernels.replica_values(params, reps, backend)
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--methods", nargs="+", default=["arithmetic_mean", "min_variance", "delegation", "borda"])
    p.add_argument("--cost", default="uniform")
    p.add_argument("--n-groups", type=int, default=3)
    p.add_argument("--beta", type=float, default=10 / 3)
    p.add_argument("--runs", type=int, default=3)
    p.add_argument("--json", help="write results to this file")
    args = p.parse_args(argv)

    if not kernels.HAVE_NUMBA:
        print("numba unavailable (or CK_NO_NUMBA set); only the numpy path runs", file=sys.stderr)
    reps = np.arange(args.samples, dtype=np.int64)
    results = []
    print(f"{'method':<18}{'numba s':>10}{'numpy s':>10}{'speedup':>9}{'max |diff|':>12}")
    for name in args.methods:
        cfg = ScenarioConfig(method=name, cost_kind=args.cost, n_groups=args.n_groups, beta=args.beta)
        params = build_params(cfg)
        t_np, out_np = time_path(params, reps, "numpy", args.runs)
        if kernels.HAVE_NUMBA:
            t_nb, out_nb = time_path(params, reps, "numba", args.runs)
            diff = float(np.max(np.abs(out_nb - out_np)))
        else:
            t_nb, diff = float("nan"), float("nan")
        row = dict(method=name, samples=args.samples, numba_s=t_nb, numpy_s=t_np,
                   speedup=t_np / t_nb if t_nb == t_nb else float("nan"), max_abs_diff=diff)
        results.append(row)
        print(f"{name:<18}{t_nb:>10.3f}{t_np:>10.3f}{row['speedup']:>9.2f}{diff:>12.3g}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(results, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
