"""Time the compiled plate kernel against the pure-numpy fallback.

Both backends expose the same in-place apply_plates entry point; this
script drives them with identical balanced-protocol workloads on square
grids of increasing size and reports the best-of-N wall time for each,
plus the agreement between their outputs.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 65 201 501 --steps 20
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from qwalk2d import BOUNDARY_TOL, balanced_protocol
from qwalk2d._kernels import _walk_np

try:
    from qwalk2d._kernels import _walk_cy
except ImportError:
    _walk_cy = None


def plate_arrays(plates):
    kinds = np.array([int(p.kind) for p in plates], dtype=np.int32)
    comps = [p.components() for p in plates]
    cvals = np.array([c for c, _ in comps], dtype=np.float64)
    svals = np.array([s for _, s in comps], dtype=np.float64)
    return kinds, cvals, svals


def make_grid(size: int) -> np.ndarray:
    grid = np.zeros((size, size, 2), dtype=np.complex128)
    grid[size // 2, size // 2, 0] = 1.0
    return grid


def run_once(backend, size: int, kinds, cvals, svals) -> tuple[float, np.ndarray]:
    grid = make_grid(size)
    start = time.perf_counter()
    rc = backend.apply_plates(grid, kinds, cvals, svals, BOUNDARY_TOL)
    elapsed = time.perf_counter() - start
    if rc != -1:
        raise RuntimeError(f"kernel reported boundary overflow at plate {rc}")
    return elapsed, grid


def best_of(backend, size, kinds, cvals, svals, repeats):
    times = []
    grid = None
    for _ in range(repeats):
        elapsed, grid = run_once(backend, size, kinds, cvals, svals)
        times.append(elapsed)
    return min(times), grid


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[33, 101, 301])
    parser.add_argument("--steps", type=int, default=10,
                        help="balanced steps per run (4 plates each)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="repeats per size; best time wins")
    args = parser.parse_args()

    plates = balanced_protocol().plates * args.steps
    kinds, cvals, svals = plate_arrays(plates)
    print(f"workload: {len(plates)} plates ({args.steps} balanced steps), "
          f"best of {args.repeats}")
    if _walk_cy is None:
        print("compiled backend not importable; timing the numpy fallback only")
    header = f"{'grid':>10} {'numpy':>12} {'cython':>12} {'speedup':>9} {'max |diff|':>12}"
    print(header)
    print("-" * len(header))
    for size in args.sizes:
        t_np, g_np = best_of(_walk_np, size, kinds, cvals, svals, args.repeats)
        if _walk_cy is None:
            print(f"{size:>7}^2 {t_np * 1e3:>10.2f}ms {'-':>12} {'-':>9} {'-':>12}")
            continue
        t_cy, g_cy = best_of(_walk_cy, size, kinds, cvals, svals, args.repeats)
        diff = float(np.abs(g_np - g_cy).max())
        print(f"{size:>7}^2 {t_np * 1e3:>10.2f}ms {t_cy * 1e3:>10.2f}ms "
              f"{t_np / t_cy:>8.1f}x {diff:>12.2e}")


if __name__ == "__main__":
    main()
