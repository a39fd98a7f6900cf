#!/usr/bin/env python3
"""Benchmark the compiled solve kernels against the pure-numpy fallback.

Times the fused solve loop (fixed iteration budget, tolerance 0 so no
early exit) on representative problem sizes and reports per-iteration
cost for each backend plus the speedup.

Usage: python benchmarks/bench_backends.py [--iters 2000] [--repeat 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from phasemin import _kernels_py, make_instance, random_unit_iterate

try:
    from phasemin import _ext
except ImportError:
    _ext = None

SIZES = [(16, 128), (16, 256), (64, 1024), (128, 2048), (256, 4096)]


def time_loop(kernels, inst, w1, iters: int, repeat: int) -> float:
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        kernels.solve_loop(
            inst.basis.columns, inst.y, inst.z, w1,
            1e-300, iters, 0,
        )
        best = min(best, time.perf_counter() - t0)
    return best / iters


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--iters", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    print(f"{'n':>5} {'m':>6} {'numpy us/it':>12} {'compiled us/it':>15} {'speedup':>8}")
    for n, m in SIZES:
        inst = make_instance(1234, n, m)
        w1 = random_unit_iterate(np.random.default_rng(5678), inst)
        t_py = time_loop(_kernels_py, inst, w1, args.iters, args.repeat)
        if _ext is not None:
            t_c = time_loop(_ext, inst, w1, args.iters, args.repeat)
            print(f"{n:>5} {m:>6} {t_py*1e6:>12.2f} {t_c*1e6:>15.2f} {t_py/t_c:>8.2f}x")
        else:
            print(f"{n:>5} {m:>6} {t_py*1e6:>12.2f} {'(not built)':>15} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
