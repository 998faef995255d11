"""Benchmark the window-enumeration kernel: compiled extension vs fallback.

Times count_window and fill_window on lattices sized like real searches
(a handful of dimensions, mixed units, a narrow integer window) and checks
that both implementations return identical results.

Usage: python3 benchmarks/bench_window.py [--repeat 5] [--seed 0]
"""

import argparse
import sys
import time

import numpy as np

from enc.kernels import IMPLEMENTATION, count_window, fill_window


def make_workload(rng, dims, count_range, unit_range, width):
    """A lattice plus an integer window covering `width` of its range."""
    counts = rng.integers(*count_range, size=dims)
    units = rng.integers(*unit_range, size=dims)
    total = int(np.sum(units * (counts - 1)))
    mid = total // 2
    half = max(1, int(width * total / 2))
    return counts, units, mid - half, mid + half


def best_of(repeat, fn):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions; the best run is reported")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    workloads = [
        ("small  (d=6)", make_workload(rng, 6, (4, 12), (50, 400), 0.02)),
        ("medium (d=10)", make_workload(rng, 10, (4, 10), (50, 400), 0.004)),
        ("deep   (d=13)", make_workload(rng, 13, (3, 8), (100, 900), 0.002)),
    ]
    impls = ["python"]
    if IMPLEMENTATION == "compiled":
        impls.insert(0, None)       # None selects the compiled kernel
    else:
        print("compiled extension not built; timing the fallback only")

    print(f"active implementation: {IMPLEMENTATION}")
    print(f"{'workload':<16} {'kernel':<10} {'tuples':>10} "
          f"{'count':>10} {'fill':>10}")
    mismatches = 0
    for name, (counts, units, lo, hi) in workloads:
        rows = {}
        for impl in impls:
            label = impl or "compiled"
            n = count_window(counts, units, lo, hi, impl=impl)
            t_count = best_of(args.repeat, lambda: count_window(
                counts, units, lo, hi, impl=impl))
            t_fill = best_of(args.repeat, lambda: fill_window(
                counts, units, lo, hi, impl=impl))
            idx, sums = fill_window(counts, units, lo, hi, impl=impl)
            rows[label] = (n, idx, sums)
            print(f"{name:<16} {label:<10} {n:>10} "
                  f"{t_count * 1e3:>8.2f}ms {t_fill * 1e3:>8.2f}ms")
        if len(rows) == 2:
            (n_c, idx_c, sums_c), (n_p, idx_p, sums_p) = \
                rows["compiled"], rows["python"]
            same = n_c == n_p and np.array_equal(idx_c, idx_p) \
                and np.array_equal(sums_c, sums_p)
            if not same:
                mismatches += 1
                print(f"{name:<16} MISMATCH between implementations")
    if mismatches:
        print(f"{mismatches} workload(s) disagreed", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
