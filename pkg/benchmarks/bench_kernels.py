#!/usr/bin/env python3
"""Benchmark the compiled extension against the pure NumPy backend.

Times the three hot kernels (chain generation, score replay, weighted
moment) and one end-to-end penalized path step.  Run:

    python benchmarks/bench_kernels.py [--quick]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from isinglasso import _kernels_py
from isinglasso.edges import n_edges
from isinglasso.gibbs import _adjacency, run_chain, sample_dataset
from isinglasso.mcobj import McObjective
from isinglasso.rng import RngSeed, derive_key
from isinglasso.solver import SolverOptions, fista

try:
    from isinglasso import _kernels as _compiled
except ImportError:
    _compiled = None


def timeit(fn, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backend(backend, d, m, steps):
    gen = np.random.default_rng(0)
    psi = gen.normal(0, 0.4, size=n_edges(d))
    psi[gen.uniform(size=psi.size) > 0.3] = 0.0
    ptr, site, val = _adjacency(psi, d)
    y0 = gen.choice([-1, 1], size=d).astype(np.int8)
    key = derive_key(1)

    out = {}
    out["gibbs_chain"] = timeit(
        lambda: backend.gibbs_chain(d, ptr, site, val, y0, 0, steps, key)
    )
    start, sites, newvals, _, _ = backend.gibbs_chain(d, ptr, site, val, y0, 0, m, key)
    ev = backend.ChainEvaluator(d, start, sites, newvals)
    u = gen.normal(0, 0.3, size=n_edges(d))
    w = gen.uniform(size=m)
    w /= w.sum()
    out["scores"] = timeit(lambda: ev.scores(u))
    out["weighted_mean"] = timeit(lambda: ev.weighted_mean(w))
    return out


def bench_path_step(monkey_pure: bool, d, n, m):
    import isinglasso.backend as backend_mod

    saved = (backend_mod.gibbs_chain, backend_mod.ChainEvaluator)
    if monkey_pure:
        backend_mod.gibbs_chain = _kernels_py.gibbs_chain
        backend_mod.ChainEvaluator = _kernels_py.ChainEvaluator
    try:
        gen = np.random.default_rng(2)
        theta_star = np.zeros(n_edges(d))
        theta_star[gen.choice(n_edges(d), 8, replace=False)] = gen.choice(
            [-1.0, 1.0], 8
        )
        data = sample_dataset(theta_star, n, chain_len=5000, seed=RngSeed(3))

        def one_step():
            sample = run_chain(theta_star, m=m, burn_in=1000, seed=RngSeed(4))
            obj = McObjective(data, sample)
            fista(obj.value, obj.grad, 0.15, np.zeros(n_edges(d)), SolverOptions())

        return timeit(one_step, repeat=2)
    finally:
        backend_mod.gibbs_chain, backend_mod.ChainEvaluator = saved


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="smaller sizes")
    args = parser.parse_args()

    d = 20
    m = 20_000 if args.quick else 100_000
    steps = 100_000 if args.quick else 1_000_000

    backends = [("pure", _kernels_py)]
    if _compiled is not None:
        backends.insert(0, ("compiled", _compiled))
    else:
        print("compiled extension not built; timing pure backend only")

    results = {name: bench_backend(mod, d, m, steps) for name, mod in backends}
    print(f"\nkernels at d={d}, m={m}, chain steps={steps}")
    print(f"{'kernel':<16}" + "".join(f"{name:>14}" for name, _ in backends) + "  speedup")
    for kernel in ("gibbs_chain", "scores", "weighted_mean"):
        row = f"{kernel:<16}"
        for name, _ in backends:
            row += f"{results[name][kernel] * 1e3:>12.2f}ms"
        if len(backends) == 2:
            row += f"  {results['pure'][kernel] / results['compiled'][kernel]:>6.1f}x"
        print(row)

    print(f"\nend-to-end penalized fit (chain + solve) at d={d}, n=300, m={m // 2}")
    t_active = bench_path_step(False, d, 300, m // 2)
    print(f"{'active backend':<16}{t_active * 1e3:>12.1f}ms")
    if _compiled is not None:
        t_pure = bench_path_step(True, d, 300, m // 2)
        print(f"{'pure backend':<16}{t_pure * 1e3:>12.1f}ms  ({t_pure / t_active:.1f}x)")


if __name__ == "__main__":
    main()
