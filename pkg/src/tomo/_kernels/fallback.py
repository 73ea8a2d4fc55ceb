"""Numpy reference implementation of the rasterization kernels.

Mirrors tomo._kernels.native exactly: same edge-function predicate,
same first-wins fill order, same bounding-box walk. Keep the two in
lockstep; the test suite compares their outputs bitwise.
"""

from __future__ import annotations

import numpy as np


def locate_cells(
    nodes: np.ndarray,
    triangles: np.ndarray,
    xs: np.ndarray,
    ys: np.ndarray,
) -> np.ndarray:
    """Map every grid point to its containing triangle.

    Parameters
    ----------
    nodes : (N, 2) float64
    triangles : (T, 3) int32, counterclockwise
    xs : (nx,) float64, ascending uniform grid
    ys : (ny,) float64, ascending uniform grid

    Returns
    -------
    (ny, nx) int32 grid of triangle indices, -1 where no triangle
    contains the point. Points on shared edges go to the lowest
    triangle index (triangles are scanned in ascending order and the
    first hit wins).
    """
    nx = xs.shape[0]
    ny = ys.shape[0]
    out = np.full((ny, nx), -1, dtype=np.int32)
    dx = xs[1] - xs[0] if nx > 1 else 1.0
    dy = ys[1] - ys[0] if ny > 1 else 1.0
    x0 = xs[0]
    y0 = ys[0]
    pts = nodes[triangles]
    for t in range(triangles.shape[0]):
        ax, ay = pts[t, 0]
        bx, by = pts[t, 1]
        cx, cy = pts[t, 2]
        ix0 = max(0, int((min(ax, bx, cx) - x0) / dx) - 1)
        ix1 = min(nx - 1, int((max(ax, bx, cx) - x0) / dx) + 1)
        iy0 = max(0, int((min(ay, by, cy) - y0) / dy) - 1)
        iy1 = min(ny - 1, int((max(ay, by, cy) - y0) / dy) + 1)
        if ix0 > ix1 or iy0 > iy1:
            continue
        px = xs[ix0:ix1 + 1][None, :]
        py = ys[iy0:iy1 + 1][:, None]
        d0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        d1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
        d2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
        inside = (d0 >= 0.0) & (d1 >= 0.0) & (d2 >= 0.0)
        region = out[iy0:iy1 + 1, ix0:ix1 + 1]
        np.copyto(region, t, where=inside & (region == -1))
    return out


def locate_points(
    nodes: np.ndarray,
    triangles: np.ndarray,
    points: np.ndarray,
) -> np.ndarray:
    """Containing triangle index for each point in a small batch, -1 if none."""
    pts = nodes[triangles]
    ax = pts[:, 0, 0]
    ay = pts[:, 0, 1]
    bx = pts[:, 1, 0]
    by = pts[:, 1, 1]
    cx = pts[:, 2, 0]
    cy = pts[:, 2, 1]
    out = np.full(points.shape[0], -1, dtype=np.int32)
    for i, (px, py) in enumerate(points):
        d0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
        d1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
        d2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
        inside = (d0 >= 0.0) & (d1 >= 0.0) & (d2 >= 0.0)
        if inside.any():
            out[i] = int(np.argmax(inside))
    return out
