# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rasterization kernels.

Bit-for-bit mirror of tomo._kernels.fallback; see that module for the
contract. Keep the arithmetic expressions identical between the two.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def locate_cells(
    cnp.ndarray[cnp.float64_t, ndim=2] nodes,
    cnp.ndarray[cnp.int32_t, ndim=2] triangles,
    cnp.ndarray[cnp.float64_t, ndim=1] xs,
    cnp.ndarray[cnp.float64_t, ndim=1] ys,
):
    cdef int nx = xs.shape[0]
    cdef int ny = ys.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] out = np.full((ny, nx), -1, dtype=np.int32)
    cdef double dx = xs[1] - xs[0] if nx > 1 else 1.0
    cdef double dy = ys[1] - ys[0] if ny > 1 else 1.0
    cdef double x0 = xs[0]
    cdef double y0 = ys[0]
    cdef Py_ssize_t t, ix, iy
    cdef int ix0, ix1, iy0, iy1
    cdef double ax, ay, bx, by, cx, cy, px, py, d0, d1, d2, lo, hi

    for t in range(triangles.shape[0]):
        ax = nodes[triangles[t, 0], 0]
        ay = nodes[triangles[t, 0], 1]
        bx = nodes[triangles[t, 1], 0]
        by = nodes[triangles[t, 1], 1]
        cx = nodes[triangles[t, 2], 0]
        cy = nodes[triangles[t, 2], 1]

        lo = min(ax, min(bx, cx))
        hi = max(ax, max(bx, cx))
        ix0 = <int>((lo - x0) / dx) - 1
        ix1 = <int>((hi - x0) / dx) + 1
        if ix0 < 0:
            ix0 = 0
        if ix1 > nx - 1:
            ix1 = nx - 1
        lo = min(ay, min(by, cy))
        hi = max(ay, max(by, cy))
        iy0 = <int>((lo - y0) / dy) - 1
        iy1 = <int>((hi - y0) / dy) + 1
        if iy0 < 0:
            iy0 = 0
        if iy1 > ny - 1:
            iy1 = ny - 1

        for iy in range(iy0, iy1 + 1):
            py = ys[iy]
            for ix in range(ix0, ix1 + 1):
                if out[iy, ix] != -1:
                    continue
                px = xs[ix]
                d0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
                if d0 < 0.0:
                    continue
                d1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
                if d1 < 0.0:
                    continue
                d2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
                if d2 >= 0.0:
                    out[iy, ix] = <cnp.int32_t>t
    return out


def locate_points(
    cnp.ndarray[cnp.float64_t, ndim=2] nodes,
    cnp.ndarray[cnp.int32_t, ndim=2] triangles,
    cnp.ndarray[cnp.float64_t, ndim=2] points,
):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t nt = triangles.shape[0]
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.full(n, -1, dtype=np.int32)
    cdef Py_ssize_t i, t
    cdef double ax, ay, bx, by, cx, cy, px, py, d0, d1, d2

    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        for t in range(nt):
            ax = nodes[triangles[t, 0], 0]
            ay = nodes[triangles[t, 0], 1]
            bx = nodes[triangles[t, 1], 0]
            by = nodes[triangles[t, 1], 1]
            cx = nodes[triangles[t, 2], 0]
            cy = nodes[triangles[t, 2], 1]
            d0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            if d0 < 0.0:
                continue
            d1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
            if d1 < 0.0:
                continue
            d2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
            if d2 >= 0.0:
                out[i] = <cnp.int32_t>t
                break
    return out
