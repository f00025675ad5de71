"""Micro-benchmarks for the two hot kernels, accelerated vs plain numpy.

Usage: python3 benchmarks/bench_kernels.py [--repeats N] [--points N] [--modes N]

The library picks its path from the KSLYAP_NUMBA environment variable at
import time; this script times both code paths explicitly regardless, unless
numba is unavailable or disabled, in which case only numpy is timed.
"""

import argparse
import time

import numpy as np

from kslyap import _accel
from kslyap._accel import gram_from_cosine, qtilde_values


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--points", type=int, default=1 << 23, help="qtilde sample count")
    ap.add_argument("--modes", type=int, default=2048, help="gram matrix size")
    args = ap.parse_args()

    print(f"numba available: {_accel.HAS_NUMBA}; accelerated path enabled: {_accel.USE_NUMBA}")

    a, q0, q1, delta = 1.0, 0.5, 2.0, 1.0 / 64.0
    y = np.linspace(-(a + delta), a + delta, args.points)
    rng = np.random.default_rng(0)
    c = rng.standard_normal(2 * args.modes + 1)

    jobs = [
        ("qtilde_values", lambda fp: qtilde_values(y, a, q0, q1, delta, force_numpy=fp)),
        ("gram_from_cosine", lambda fp: gram_from_cosine(c, args.modes, force_numpy=fp)),
    ]
    for name, call in jobs:
        if _accel.USE_NUMBA:
            call(False)  # compile outside the timed region
        t_np = best_of(lambda: call(True), args.repeats)
        print(f"{name:18s} numpy {t_np * 1e3:9.2f} ms")
        if _accel.USE_NUMBA:
            t_nb = best_of(lambda: call(False), args.repeats)
            print(f"{name:18s} numba {t_nb * 1e3:9.2f} ms   speedup x{t_np / t_nb:.2f}")
        else:
            print(f"{name:18s} numba    skipped (disabled or unavailable)")


if __name__ == "__main__":
    main()
