"""Classical linearized reconstruction: back projection, Landweber, Tikhonov.

Each algorithm maps a normalized measurement frame and a sensitivity
matrix to a per-element gray image. The algebra runs on raw values; a
final min-max rescale produces the [0, 1] image that downstream code
rasterizes and scores. Pass ``rescale=False`` to inspect the raw
algebraic solution instead.

``rasterize`` paints element values onto the square pixel grid shared
by the metrics and dataset modules.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from ._kernels import locate_cells, locate_points
from .errors import ConfigurationError, DomainError, ShapeError, SolverError
from .mesh import DiscMesh
from .sensitivity import NormalizedFrame, SensitivityMatrix

IMAGE_SIZE = 256
DEFAULT_ITERATIONS = 200

# Step sizes are validated against twice the inverse spectral norm of
# the gram matrix; anything at or past that bound diverges.
_STEP_BOUND = 2.0

ALGORITHMS = ("lbp", "landweber", "tikhonov")


def _as_matrix(matrix: SensitivityMatrix | np.ndarray) -> np.ndarray:
    if isinstance(matrix, SensitivityMatrix):
        return matrix.entries
    arr = np.asarray(matrix, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"sensitivity matrix must be 2-d, got shape {arr.shape}")
    return arr


def _as_frame(frame: NormalizedFrame | np.ndarray, matrix: np.ndarray) -> np.ndarray:
    values = frame.values if isinstance(frame, NormalizedFrame) else frame
    vec = np.asarray(values, dtype=np.float64).ravel()
    if vec.shape[0] != matrix.shape[0]:
        raise ShapeError(
            f"sensitivity matrix has shape {matrix.shape} "
            f"but the frame has {vec.shape[0]} values"
        )
    return vec


def rescale_unit(g: np.ndarray) -> np.ndarray:
    """Min-max rescale to [0, 1]. A constant field maps to all zeros."""
    lo = float(g.min())
    hi = float(g.max())
    if hi == lo:
        return np.zeros_like(g)
    return (g - lo) / (hi - lo)


def _finish(g: np.ndarray, rescale: bool, clamp: bool = False,
            binarize: bool = False) -> np.ndarray:
    if not rescale:
        return g
    g = rescale_unit(g)
    if clamp:
        g = np.clip(g, 0.0, 1.0)
    if binarize:
        g = (g >= 0.5).astype(np.float64)
    return g


def lbp(frame: NormalizedFrame | np.ndarray,
        matrix: SensitivityMatrix | np.ndarray,
        *, rescale: bool = True) -> np.ndarray:
    """Linear back projection: the transpose stands in for the inverse."""
    s = _as_matrix(matrix)
    u = _as_frame(frame, s)
    return _finish(s.T @ u, rescale)


def gram_spectral_norm(matrix: SensitivityMatrix | np.ndarray) -> float:
    """Largest eigenvalue of S^T S by power iteration, 1e-6 relative."""
    s = _as_matrix(matrix)
    if not np.any(s):
        raise DomainError("sensitivity matrix is identically zero")
    rng = np.random.default_rng(0)
    for _ in range(2):
        v = rng.standard_normal(s.shape[1])
        v /= np.linalg.norm(v)
        estimate = 0.0
        for _ in range(10_000):
            w = s.T @ (s @ v)
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                # Start vector landed in the null space; redraw.
                break
            v = w / norm
            if abs(norm - estimate) <= 1e-6 * norm:
                return norm
            estimate = norm
        else:
            raise SolverError("power iteration did not converge in 10000 steps")
    raise SolverError("power iteration failed to find a nonzero direction")


def max_step_size(matrix: SensitivityMatrix | np.ndarray) -> float:
    """Safe Landweber gain 1/|S^T S|, half the divergence bound."""
    return 1.0 / gram_spectral_norm(matrix)


def _resolve_step(s: np.ndarray, step_size: float | None) -> float:
    if step_size is None:
        return 1.0 / gram_spectral_norm(s)
    product = step_size * gram_spectral_norm(s)
    if not (0.0 < product < _STEP_BOUND):
        raise ConfigurationError(
            f"step size {step_size:g} gives ||a S^T S|| = {product:g}; "
            f"convergence requires a value in (0, {_STEP_BOUND:g})"
        )
    return float(step_size)


def landweber(frame: NormalizedFrame | np.ndarray,
              matrix: SensitivityMatrix | np.ndarray,
              *, iterations: int = DEFAULT_ITERATIONS,
              step_size: float | None = None,
              rescale: bool = True) -> np.ndarray:
    """Gradient descent on the data misfit from a zero start.

    Runs exactly `iterations` updates g <- g + a S^T (u - S g) with a
    constant gain. One update from zero reduces to back projection
    scaled by the gain.
    """
    s = _as_matrix(matrix)
    u = _as_frame(frame, s)
    if iterations < 0:
        raise ConfigurationError(f"iteration count must be >= 0, got {iterations}")
    step = _resolve_step(s, step_size)
    g = np.zeros(s.shape[1])
    for _ in range(iterations):
        g = g + step * (s.T @ (u - s @ g))
    return _finish(g, rescale)


def landweber_residual_history(frame: NormalizedFrame | np.ndarray,
                               matrix: SensitivityMatrix | np.ndarray,
                               *, iterations: int = DEFAULT_ITERATIONS,
                               step_size: float | None = None) -> np.ndarray:
    """Data-misfit norms |u - S g_k| for k = 0..iterations."""
    s = _as_matrix(matrix)
    u = _as_frame(frame, s)
    if iterations < 0:
        raise ConfigurationError(f"iteration count must be >= 0, got {iterations}")
    step = _resolve_step(s, step_size)
    g = np.zeros(s.shape[1])
    history = np.empty(iterations + 1)
    history[0] = np.linalg.norm(u)
    for k in range(iterations):
        g = g + step * (s.T @ (u - s @ g))
        history[k + 1] = np.linalg.norm(u - s @ g)
    return history


def default_regularization(matrix: SensitivityMatrix | np.ndarray) -> float:
    """Scale-aware Tikhonov weight: 1e-2 times the mean gram diagonal."""
    s = _as_matrix(matrix)
    return 1e-2 * float(np.einsum("mk,mk->", s, s)) / s.shape[1]


def tikhonov(frame: NormalizedFrame | np.ndarray,
             matrix: SensitivityMatrix | np.ndarray,
             *, regularization: float | None = None,
             clamp: bool = True,
             binarize: bool = False,
             rescale: bool = True) -> np.ndarray:
    """Regularized normal equations (S^T S + lambda I) g = S^T u.

    Solved by direct Cholesky factorization. With `binarize` the
    clamped image is thresholded at 0.5 into a hard two-level mask;
    the default keeps the continuous gray image.
    """
    s = _as_matrix(matrix)
    u = _as_frame(frame, s)
    lam = default_regularization(s) if regularization is None else float(regularization)
    if lam < 0:
        raise ConfigurationError(f"regularization weight must be >= 0, got {lam:g}")
    gram = s.T @ s
    gram[np.diag_indices_from(gram)] += lam
    try:
        factor = scipy.linalg.cho_factor(gram)
    except scipy.linalg.LinAlgError as err:
        raise SolverError(
            f"normal matrix is singular at regularization {lam:g}; "
            "pass a positive weight"
        ) from err
    g = scipy.linalg.cho_solve(factor, s.T @ u)
    return _finish(g, rescale, clamp=clamp, binarize=binarize)


def _rim_radius(mesh: DiscMesh) -> float:
    """Distance from the origin to the nearest boundary chord."""
    a = mesh.nodes[mesh.boundary_edges[:, 0]]
    b = mesh.nodes[mesh.boundary_edges[:, 1]]
    cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    lengths = np.hypot(b[:, 0] - a[:, 0], b[:, 1] - a[:, 1])
    return float(np.min(cross / lengths))


def rasterize(mesh: DiscMesh, values: np.ndarray, size: int = IMAGE_SIZE) -> np.ndarray:
    """Paint per-element values onto a size x size grid over [-1, 1]^2.

    Each pixel whose center falls in element k gets values[k]; centers
    on a shared edge go to the lower element index. Pixels outside the
    unit disc stay 0. Centers in the thin slivers between the mesh rim
    and the disc are projected radially onto the rim so a uniform
    field covers every in-disc pixel. Row 0 is the top of the image.
    """
    vec = np.asarray(values, dtype=np.float64).ravel()
    if vec.shape[0] != mesh.n_triangles:
        raise ShapeError(
            f"mesh has {mesh.n_triangles} elements but got {vec.shape[0]} values"
        )
    coords = -1.0 + 2.0 * (np.arange(size) + 0.5) / size
    grid = locate_cells(mesh.nodes, mesh.triangles, coords, coords)
    xg, yg = np.meshgrid(coords, coords)
    missed = (grid < 0) & (xg * xg + yg * yg <= 1.0)
    if missed.any():
        rim = _rim_radius(mesh) * (1.0 - 1e-9)
        r = np.hypot(xg[missed], yg[missed])
        scale = np.minimum(1.0, rim / r)
        pts = np.column_stack([xg[missed] * scale, yg[missed] * scale])
        grid[missed] = locate_points(mesh.nodes, mesh.triangles, pts)
    img = np.zeros((size, size))
    hit = grid >= 0
    img[hit] = vec[grid[hit]]
    return img[::-1].copy()
