"""Timing comparison between the compiled and plain-array solver backends.

Run as a script:

    python3 benchmarks/bench_lp.py [--reps 5] [--seed 0]

Three workloads: batches of dense random LPs, a warm-started multi-objective
sweep over one feasible set, and a full hierarchy round on a two-pair
instance. The compiled backend pays a one-time compilation cost that is
excluded by a warmup pass.
"""

import argparse
import time

import numpy as np

from screlax.instance import random_instance
from screlax.formulations import build_mip_alpha
from screlax.lp import LinearProgram, solve_lp, solve_many
from screlax.relaxation import DirectionSet, default_probes, run_hierarchy


def random_lp(rng, n=30, m=45):
    a = rng.normal(size=(m, n))
    x0 = rng.uniform(0.0, 1.0, size=n)
    b = a @ x0 + rng.uniform(0.1, 1.0, size=m)  # feasible by construction
    c = rng.normal(size=n)
    return LinearProgram(c=c, a_ub=a, b_ub=b, lb=np.zeros(n),
                         ub=np.full(n, 10.0), maximize=True)


def bench_solve(backend, reps, seed):
    rng = np.random.default_rng(seed)
    lps = [random_lp(rng) for _ in range(20)]
    solve_lp(lps[0], backend=backend)  # warmup / compile
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        vals = [solve_lp(lp, backend=backend).value for lp in lps]
        best = min(best, time.perf_counter() - t0)
    return best, float(np.sum(vals))


def bench_many(backend, reps, seed):
    rng = np.random.default_rng(seed)
    lp = random_lp(rng, n=40, m=60)
    objectives = [rng.normal(size=40) for _ in range(64)]
    solve_many(lp, objectives[:2], backend=backend)
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        res = solve_many(lp, objectives, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, float(np.sum([r.value for r in res]))


def bench_hierarchy(backend, reps, seed):
    inst = random_instance(2, seed=seed)
    bundle = build_mip_alpha(inst)
    probes = default_probes(bundle, n_random=4, seed=0)
    kwargs = dict(d0=DirectionSet.minimal(bundle.layout), probe_dirs=probes,
                  max_iter=2, backend=backend)
    run_hierarchy(bundle, "homog_lp", **kwargs)
    best = np.inf
    for _ in range(reps):
        t0 = time.perf_counter()
        tr = run_hierarchy(bundle, "homog_lp", **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, tr.iterations[-1]["supports"]["0"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ns = ap.parse_args()

    workloads = [("20 dense LPs (30 vars, 45 rows)", bench_solve),
                 ("64-objective warm sweep (40 vars)", bench_many),
                 ("hierarchy round, two pairs", bench_hierarchy)]
    print(f"{'workload':<38} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for label, fn in workloads:
        t_nb, v_nb = fn("numba", ns.reps, ns.seed)
        t_np, v_np = fn("numpy", ns.reps, ns.seed)
        if isinstance(v_nb, float) and abs(v_nb - v_np) > 1e-6 * (1 + abs(v_nb)):
            raise SystemExit(f"backend mismatch on {label}: {v_nb} vs {v_np}")
        print(f"{label:<38} {t_nb * 1e3:>9.2f}ms {t_np * 1e3:>9.2f}ms "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
