#!/usr/bin/env python3
"""Benchmark the numba and numpy implementations of the scanning kernels.

Both backends are imported directly (bypassing the env-flag dispatch) and
timed on the same inputs, so a single run reports the jit speedup.  The
solver cost is quadratic in n; sizes are kept moderate so the numpy path
finishes quickly.

    python benchmarks/bench_kernels.py [--sizes 512 1024] [--degrees 0 1 3]
"""

import argparse
import time

import numpy as np

from polyseg import _kernels_numba, _kernels_numpy
from polyseg._moments import binomial_table, symmetric_power_table


def time_call(fn, *args, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[512, 1024, 2048])
    parser.add_argument("--degrees", type=int, nargs="+", default=[0, 1, 3])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':<10} {'n':>6} {'r':>2} {'numba':>10} {'numpy':>10} {'speedup':>8}")
    for degree in args.degrees:
        for n in args.sizes:
            z = rng.standard_normal(n)
            z -= z.mean()
            sym = symmetric_power_table(n, degree)
            binom = binomial_table(degree)
            lam = 2.0 * np.log(n)
            # warm the jit outside the timed region
            _kernels_numba.dp_scan(z[:32].copy(), degree, lam, 1, sym[:, :33], binom)
            t_nb = time_call(
                _kernels_numba.dp_scan, z, degree, lam, 1, sym, binom,
                repeats=args.repeats,
            )
            t_np = time_call(
                _kernels_numpy.dp_scan, z, degree, lam, 1, sym, binom,
                repeats=args.repeats,
            )
            print(
                f"{'dp_scan':<10} {n:>6} {degree:>2} {t_nb:>9.4f}s {t_np:>9.4f}s "
                f"{t_np / t_nb:>7.1f}x"
            )
    degree, n = 1, 1024
    eps = rng.standard_normal(n)
    sym = symmetric_power_table(n, degree)
    binom = binomial_table(degree)
    _kernels_numba.noise_max(eps[:32].copy(), degree, sym[:, :33], binom)
    t_nb = time_call(_kernels_numba.noise_max, eps, degree, sym, binom)
    t_np = time_call(_kernels_numpy.noise_max, eps, degree, sym, binom)
    print(
        f"{'noise_max':<10} {n:>6} {degree:>2} {t_nb:>9.4f}s {t_np:>9.4f}s "
        f"{t_np / t_nb:>7.1f}x"
    )


if __name__ == "__main__":
    main()
