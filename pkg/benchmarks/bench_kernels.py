#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Both backends consume the random stream identically, so this also serves as
a large-scale cross-check: each pair of runs must produce identical output.

Usage: python benchmarks/bench_kernels.py [--quick]
"""

import argparse
import time

import numpy as np

from hypercrit._kernels import _pure
from hypercrit.betas import critical_profile, two_edge_rate_coefficients

try:
    from hypercrit._kernels import _core
except ImportError:
    _core = None


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return time.perf_counter() - t0, out


def fresh(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def bench_walk(n_vertices, quick):
    params = critical_profile(3, 1 / 3)
    coef = two_edge_rate_coefficients(params, n_vertices)
    rows = []
    t_compiled, ref = timed(_core.run_walk, fresh(1), coef, n_vertices, n_vertices)
    rows.append(("compiled", t_compiled))
    if quick and n_vertices > 200_000:
        print(f"walk  N={n_vertices:>9,}: compiled {t_compiled:8.3f}s "
              f"(fallback skipped in --quick)")
        return
    t_pure, out = timed(_pure.run_walk, fresh(1), coef, n_vertices, n_vertices)
    rows.append(("python", t_pure))
    assert np.array_equal(ref[0], out[0]), "backends diverged"
    print(f"walk  N={n_vertices:>9,}: compiled {t_compiled:8.3f}s   "
          f"python {t_pure:8.3f}s   speedup {t_pure / t_compiled:6.1f}x")


def bench_wk(n_steps, quick):
    buf1 = np.empty(n_steps)
    t_compiled, ref = timed(_core.wk_segment, fresh(2), buf1, 1.0, 3, 1e-4,
                            0, 0.0, 0.0, 0, True)
    if quick and n_steps > 200_000:
        print(f"path  steps={n_steps:>7,}: compiled {t_compiled:8.3f}s "
              f"(fallback skipped in --quick)")
        return
    buf2 = np.empty(n_steps)
    t_pure, out = timed(_pure.wk_segment, fresh(2), buf2, 1.0, 3, 1e-4,
                        0, 0.0, 0.0, 0, True)
    assert np.array_equal(buf1, buf2), "backends diverged"
    print(f"path  steps={n_steps:>7,}: compiled {t_compiled:8.3f}s   "
          f"python {t_pure:8.3f}s   speedup {t_pure / t_compiled:6.1f}x")


def bench_streaming_ceiling():
    # The cost contract: a full 1e7-step walk in O(excursions) memory.
    params = critical_profile(3, 1 / 3)
    n = 10**7
    coef = two_edge_rate_coefficients(params, n)
    elapsed, out = timed(_core.run_walk, fresh(3), coef, n, n,
                         record_children=False)
    print(f"walk  N={n:,} streaming: compiled {elapsed:.3f}s, "
          f"{out[1].shape[0]} excursions")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true",
                        help="skip the slowest pure-Python runs")
    args = parser.parse_args()
    if _core is None:
        raise SystemExit("compiled kernel not built; nothing to compare")
    for n in (10**4, 10**5, 10**6):
        bench_walk(n, args.quick)
    for steps in (10**5, 10**6):
        bench_wk(steps, args.quick)
    bench_streaming_ceiling()


if __name__ == "__main__":
    main()
