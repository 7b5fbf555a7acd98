#!/usr/bin/env python3
"""Measure FFT vs dense matvec throughput on scalar-band matrices.

Timing is reported, not asserted: the crossover depends on BLAS and FFT
builds. Sizes default to bands with k*e >= 4096 columns, d = e = 1.
"""

import argparse
import sys
import time

import numpy as np

from structcs.fastops import fast_matvec
from structcs.matrices import build_structured, distinct_blocks, toeplitz_block_spec


def bench_one(k, l, reps=20, seed=0):
    spec = toeplitz_block_spec(k, l, 1, 1, "gaussian", seed=seed)
    M = build_structured(spec)
    blocks = distinct_blocks(M)
    rng = np.random.default_rng(1)
    x = rng.standard_normal(spec.N)
    dense = M.entries

    fast_matvec(spec, blocks, x)  # warm up plans
    t0 = time.perf_counter()
    for _ in range(reps):
        dense @ x
    t_dense = (time.perf_counter() - t0) / reps

    t0 = time.perf_counter()
    for _ in range(reps):
        fast_matvec(spec, blocks, x)
    t_fft = (time.perf_counter() - t0) / reps

    err = np.linalg.norm(fast_matvec(spec, blocks, x) - dense @ x) / np.linalg.norm(
        dense @ x
    )
    return t_dense, t_fft, err


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--reps", type=int, default=20)
    args = parser.parse_args(argv)
    print(f"{'n':>6} {'N':>6} {'dense ms':>10} {'fft ms':>10} {'speedup':>8}  rel err")
    for k, l in ((4096, 512), (4096, 2048), (8192, 1024), (16384, 2048)):
        t_dense, t_fft, err = bench_one(k, l, reps=args.reps)
        print(f"{l:>6} {k:>6} {t_dense * 1e3:>10.2f} {t_fft * 1e3:>10.2f} "
              f"{t_dense / t_fft:>8.1f}  {err:.2e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
