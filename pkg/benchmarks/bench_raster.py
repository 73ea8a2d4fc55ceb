"""Time the compiled point-location kernel against the numpy fallback.

The kernel dominates dataset generation: every sample rasterizes one
image per algorithm plus the target, and each image is a full grid of
point-in-triangle lookups. Run from the repo root:

    python3 benchmarks/bench_raster.py [--size 256] [--repeats 20]

Outputs agree bitwise by contract; this script re-checks that before
printing timings, so a divergence shows up here as well as in the
test suite.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tomo._kernels import HAVE_NATIVE, fallback
from tomo.mesh import build_disc_mesh


def time_call(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=256, help="grid edge in pixels")
    parser.add_argument("--repeats", type=int, default=20,
                        help="timed repetitions; the best run is reported")
    parser.add_argument("--rings", type=int, default=16)
    parser.add_argument("--electrodes", type=int, default=32)
    args = parser.parse_args()

    mesh = build_disc_mesh(args.rings, args.electrodes)
    coords = -1.0 + 2.0 * (np.arange(args.size) + 0.5) / args.size
    print(f"mesh: {mesh.n_triangles} triangles, grid: {args.size} x {args.size}, "
          f"best of {args.repeats}")

    slow = time_call(
        lambda: fallback.locate_cells(mesh.nodes, mesh.triangles, coords, coords),
        args.repeats,
    )
    print(f"fallback  locate_cells: {slow * 1e3:8.2f} ms")

    if not HAVE_NATIVE:
        print("compiled kernel not built; nothing to compare")
        return 0

    from tomo._kernels import native

    a = native.locate_cells(mesh.nodes, mesh.triangles, coords, coords)
    b = fallback.locate_cells(mesh.nodes, mesh.triangles, coords, coords)
    if not np.array_equal(a, b):
        print("MISMATCH: backends disagree; timings below are meaningless")
        return 1

    fast = time_call(
        lambda: native.locate_cells(mesh.nodes, mesh.triangles, coords, coords),
        args.repeats,
    )
    print(f"native    locate_cells: {fast * 1e3:8.2f} ms")
    print(f"speedup: {slow / fast:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
