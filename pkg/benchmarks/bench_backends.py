#!/usr/bin/env python3
"""Compare the compiled acquisition core against the NumPy fallback.

Times the two hot kernels (periodic kernel evaluation and per-pixel
path accumulation) on a frame-sized workload and cross-checks that both
backends agree.

Usage:
    python benchmarks/bench_backends.py [--pixels N] [--phases N]
"""

import argparse
import time

import numpy as np

from phasesweep import _corekernels_np, codes

try:
    from phasesweep import _corekernels
except ImportError:
    _corekernels = None


def timeit(fn, repeats=5):
    best = np.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pixels", type=int, default=64 * 64)
    parser.add_argument("--phases", type=int, default=2000)
    parser.add_argument("--paths-per-pixel", type=int, default=2)
    args = parser.parse_args()

    code = codes.generate_msequence(5)
    kernel = codes.continuous_kernel(code, code, upsample=1)
    rng = np.random.default_rng(0)

    phases = np.arange(args.phases) * 96e-12
    total = args.pixels * args.paths_per_pixel
    delays = rng.uniform(1e-9, 2e-7, total)
    amps = rng.uniform(0.1, 2.0, total)
    indptr = np.arange(0, total + 1, args.paths_per_pixel, dtype=np.int64)
    lags = rng.uniform(-1e-6, 1e-6, args.pixels * 64)

    backends = [("numpy", _corekernels_np)]
    if _corekernels is not None:
        backends.append(("cython", _corekernels))
    else:
        print("compiled extension not available; timing fallback only")

    results = {}
    for name, impl in backends:
        eval_t = timeit(lambda: impl.eval_kernel_periodic(
            kernel.samples, kernel.sample_spacing, kernel.origin_index, lags))
        acc_t = timeit(lambda: impl.accumulate_paths(
            kernel.samples, kernel.sample_spacing, kernel.origin_index,
            phases, 0.0, delays, amps, indptr))
        results[name] = (eval_t, acc_t)
        print(f"{name:>7s}: eval {eval_t * 1e3:8.2f} ms   "
              f"accumulate {acc_t * 1e3:8.2f} ms "
              f"({args.pixels} px x {args.phases} phases "
              f"x {args.paths_per_pixel} paths)")

    if len(results) == 2:
        ev_np = _corekernels_np.eval_kernel_periodic(
            kernel.samples, kernel.sample_spacing, kernel.origin_index, lags)
        ev_cy = _corekernels.eval_kernel_periodic(
            kernel.samples, kernel.sample_spacing, kernel.origin_index, lags)
        np.testing.assert_allclose(ev_cy, ev_np, rtol=1e-13)
        acc_np = _corekernels_np.accumulate_paths(
            kernel.samples, kernel.sample_spacing, kernel.origin_index,
            phases, 0.0, delays, amps, indptr)
        acc_cy = _corekernels.accumulate_paths(
            kernel.samples, kernel.sample_spacing, kernel.origin_index,
            phases, 0.0, delays, amps, indptr)
        np.testing.assert_allclose(acc_cy, acc_np, rtol=1e-13)
        speedup = results["numpy"][1] / results["cython"][1]
        print(f"backends agree to 1e-13; accumulate speedup {speedup:.1f}x")


if __name__ == "__main__":
    main()
