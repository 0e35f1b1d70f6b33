#!/usr/bin/env python3
"""Time the numpy and numba paths of the hot kernels side by side.

    python benchmarks/bench_kernels.py [--repeat 5] [--quick]

The numba column excludes compilation (one warm-up call first); the
compile time is reported separately.  Outputs of the two paths are compared
before anything is timed.
"""

import argparse
import time

import numpy as np

from lassolab import _accel, _kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def oracle_case(m, d, seed=0):
    rng = np.random.default_rng(seed)
    s = np.where(np.arange(d) < d // 2, 1.0, 1.0 / np.sqrt(d))
    theta = np.zeros(d)
    theta[d // 2] = 1.0
    Z = theta + rng.standard_normal((m, d)) / np.sqrt(d * s)
    return Z, s, theta


def risk_case(size, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(0, 12, size), rng.uniform(-15, 15, size)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--quick", action="store_true", help="small sizes only")
    args = ap.parse_args()

    if not _accel.NUMBA_AVAILABLE:
        print("numba unavailable (or LASSOLAB_DISABLE_NUMBA set); timing the numpy path only")

    oracle_sizes = [(256, 64), (1000, 256)] if args.quick else [(256, 64), (1000, 256), (300, 1024), (300, 4096)]
    risk_sizes = [10_000] if args.quick else [10_000, 1_000_000]

    print(f"{'kernel':<22}{'shape':>14}{'numpy [ms]':>14}{'numba [ms]':>14}{'speedup':>10}{'max rel diff':>15}")
    cases = [("oracle_scan_batch", f"{m}x{d}", _kernels.oracle_scan_batch_numpy, _kernels.oracle_scan_batch_numba,
              oracle_case(m, d)) for m, d in oracle_sizes]
    cases += [("risk_soft_flat", f"{k}", _kernels.risk_soft_flat_numpy, _kernels.risk_soft_flat_numba,
               risk_case(k)) for k in risk_sizes]
    compile_times = {}
    for name, shape, f_np, f_nb, inputs in cases:
        ref = f_np(*inputs)
        t_np = best_of(lambda: f_np(*inputs), args.repeat)
        if _accel.NUMBA_AVAILABLE:
            if name not in compile_times:
                t0 = time.perf_counter()
                f_nb(*inputs)
                compile_times[name] = time.perf_counter() - t0
            got = f_nb(*inputs)
            a = np.concatenate([np.ravel(x) for x in (ref if isinstance(ref, tuple) else (ref,))])
            b = np.concatenate([np.ravel(x) for x in (got if isinstance(got, tuple) else (got,))])
            diff = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
            t_nb = best_of(lambda: f_nb(*inputs), args.repeat)
            print(f"{name:<22}{shape:>14}{1e3 * t_np:>14.2f}{1e3 * t_nb:>14.2f}{t_np / t_nb:>9.1f}x{diff:>15.1e}")
        else:
            print(f"{name:<22}{shape:>14}{1e3 * t_np:>14.2f}{'-':>14}{'-':>10}{'-':>15}")
    for name, t in compile_times.items():
        print(f"first numba call of {name} (compile or cache load): {t:.2f}s")


if __name__ == "__main__":
    main()
