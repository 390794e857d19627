#!/usr/bin/env python3
"""Compare the numba and pure-numpy backends on the hot paths.

The backend is frozen when levy_ssm is imported (env flag LEVY_SSM_NUMBA),
so each mode runs in a child interpreter that prints its timings as JSON.
Both children draw from identical Philox streams; the log-marginal checksum
printed at the end must match bit for bit across backends.

Usage: python benchmarks/bench_numba.py [--reps N]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def run_workload(reps: int) -> dict:
    import numpy as np

    from levy_ssm import (
        FilterConfig,
        GHParams,
        GIGParams,
        LangevinSSM,
        TruncationBudget,
        backend_name,
        run_filter,
        sample_gig,
        simulate_path,
    )

    gig = GIGParams(lam=-0.8, delta=1.0, gamma=2.0)
    warm = np.random.Generator(np.random.Philox(key=0))
    sample_gig(gig, (0.0, 1.0), TruncationBudget(50.0), warm)

    budget = TruncationBudget(1000.0)
    rng = np.random.Generator(np.random.Philox(key=1))
    t0 = time.perf_counter()
    jumps = 0
    for _ in range(reps):
        jumps += len(sample_gig(gig, (0.0, 1.0), budget, rng))
    t_sample = time.perf_counter() - t0

    gh = GHParams(gig=GIGParams(lam=-0.8, delta=1.0, gamma=0.01))
    ssm = LangevinSSM(theta=-0.5, sigma_eps=0.1, gh=gh)
    times = np.linspace(1.0, 20.0, 20)
    sim_rng = np.random.Generator(np.random.Philox(key=2))
    _, obs, _ = simulate_path(ssm, np.zeros(2), times, TruncationBudget(200.0), sim_rng)
    cfg = FilterConfig(n_iter=10, budget=TruncationBudget(200.0), seed=3)
    t0 = time.perf_counter()
    res = run_filter(ssm, zip(times, obs), cfg)
    t_filter = time.perf_counter() - t0

    return {
        "backend": backend_name(),
        "sample_s": t_sample,
        "jumps": jumps,
        "filter_s": t_filter,
        "log_marginal_total": sum(r.log_marginal for r in res),
    }


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=20)
    parser.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.child:
        print(json.dumps(run_workload(args.reps)))
        return 0

    results = []
    for flag in ("1", "0"):
        env = dict(os.environ, LEVY_SSM_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, os.path.abspath(__file__), "--child", "--reps", str(args.reps)],
            env=env,
            capture_output=True,
            text=True,
            check=True,
        )
        results.append(json.loads(proc.stdout.strip().splitlines()[-1]))

    fast, slow = results
    print(f"{'':10} {'sampling':>12} {'filtering':>12}")
    for r in results:
        print(f"{r['backend']:10} {r['sample_s']:>10.3f} s {r['filter_s']:>10.3f} s")
    print(
        f"{'speedup':10} {slow['sample_s'] / fast['sample_s']:>10.1f} x "
        f"{slow['filter_s'] / fast['filter_s']:>10.1f} x"
    )
    same = fast["log_marginal_total"] == slow["log_marginal_total"]
    print(f"checksum match across backends: {same}")
    return 0 if same else 1


if __name__ == "__main__":
    sys.exit(main())
