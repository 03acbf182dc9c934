"""Compare the numba and pure-numpy kernels on the two hot paths.

    python benchmarks/bench_backends.py [--n 300] [--d 30] [--repeat 3]

Reports best-of-``repeat`` wall time for building the sampled DTW similarity
matrix of a synthetic sinusoid dataset and for 20 coordinate descent passes
on it. numba compile time is excluded by a warm-up call.
"""
import argparse
import time

import numpy as np

from dtwembed import (
    DtwConfig,
    FactorizeConfig,
    build_partial_similarity,
    default_budget,
    default_window,
    factorize,
    sample_pairs,
    set_backend,
)
from dtwembed._backend import HAVE_NUMBA
from dtwembed.synthetic import sinusoid_dataset


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300, help="number of series (split over 3 classes)")
    ap.add_argument("--d", type=int, default=30)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    ds = sinusoid_dataset(n_per_class=args.n // 3, seed=0)
    n = len(ds)
    cfg = DtwConfig(default_window(ds))
    sample = sample_pairs(n, default_budget(n), seed=1)
    print(f"n={n} pairs={len(sample)} window={cfg.window} d={args.d}")

    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]
    rows = {}
    for name in backends:
        set_backend(name)
        # warm-up compiles the numba kernels
        small = sample_pairs(n, 4, seed=0)
        A_small = build_partial_similarity(ds, small, cfg)
        factorize(A_small, FactorizeConfig(d=1, iterations=1))

        t_sim, A = best_of(lambda: build_partial_similarity(ds, sample, cfg), args.repeat)
        t_fac, (X, trace) = best_of(
            lambda: factorize(A, FactorizeConfig(d=args.d, iterations=20)), args.repeat
        )
        rows[name] = (t_sim, t_fac, trace.observed_error[-1])

    print(f"{'backend':<8} {'similarity [s]':>15} {'factorize [s]':>14} {'observed err':>13}")
    for name, (t_sim, t_fac, err) in rows.items():
        print(f"{name:<8} {t_sim:>15.3f} {t_fac:>14.3f} {err:>13.3e}")
    if len(rows) == 2:
        s = rows["numpy"][0] / rows["numba"][0]
        f = rows["numpy"][1] / rows["numba"][1]
        print(f"speedup  {s:>14.1f}x {f:>13.1f}x")


if __name__ == "__main__":
    main()
