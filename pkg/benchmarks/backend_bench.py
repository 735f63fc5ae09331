"""Benchmark the compiled kernels against the pure-numpy fallback.

Times Monte-Carlo spread estimation and the exact live-edge oracle under
both backends and prints a small table.  Run:

    python benchmarks/backend_bench.py
"""

import time

from seedq import backend
from seedq.diffusion import DiffusionModel, estimate_spread, exact_spread, marginal_gain
from seedq.selection import random_seeds
from seedq.synth import preferential_attachment, random_digraph


def timed(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    g = preferential_attachment(3000, 2, rng_seed=1, weight=0.1)
    seeds = random_seeds(g, 10, rng_seed=2).nodes
    extra = min(set(range(g.n)) - set(seeds))
    tiny = random_digraph(6, 12, rng_seed=3, min_nodes=6)
    ic = DiffusionModel("ic")
    lt = DiffusionModel("lt", renormalize=True)

    cases = {
        "ic spread n=3000 R=10000": lambda: estimate_spread(g, ic, seeds, 10_000, 7).mean,
        "lt spread n=3000 R=10000": lambda: estimate_spread(g, lt, seeds, 10_000, 7).mean,
        "ic gain   n=3000 R=10000": lambda: marginal_gain(g, ic, seeds, extra, 10_000, 7),
        "ic exact  n=6 m=12": lambda: exact_spread(tiny, ic, [0]),
        "lt exact  n=6 m=12": lambda: exact_spread(tiny, lt, [0]),
    }

    backends = []
    try:
        backend.set_backend("numba")
        backend.kernels()
        backends.append("numba")
    except RuntimeError:
        print("numba not importable; benchmarking numpy only")
    finally:
        backend.set_backend(None)
    backends.append("numpy")

    results = {}
    for be in backends:
        backend.set_backend(be)
        try:
            for name, fn in cases.items():
                # warm once so numba compilation is not measured
                fn()
                results[(be, name)] = timed(fn)
        finally:
            backend.set_backend(None)

    width = max(len(n) for n in cases)
    header = f"{'case':<{width}}  " + "".join(f"{be:>12}" for be in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for name in cases:
        row = f"{name:<{width}}  "
        times = []
        for be in backends:
            t, _ = results[(be, name)]
            times.append(t)
            row += f"{t * 1e3:>10.1f}ms"
        if len(times) == 2:
            row += f"{times[1] / times[0]:>9.1f}x"
        vals = {results[(be, name)][1] for be in backends}
        if len(vals) > 1:
            row += "   <- backends disagree!"
        print(row)


if __name__ == "__main__":
    main()
