"""Synthetic inclusion phantoms and their conductivity/image views.

A phantom is a small set of geometric inclusions (circles, equilateral
triangles, squares) dropped into the unit disc over a uniform
background. The same phantom renders two ways: a per-element
conductivity field for the forward solver (element centroid lookup,
first listed inclusion wins where they overlap) and a binary 256x256
ground-truth image for training and evaluation (union of inclusions,
white on black).

Sampling is fully determined by an integer seed, so corpora are
reproducible item by item.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ConfigurationError, DomainError, ShapeError
from .mesh import DiscMesh, element_centroids

IMAGE_SIZE = 256

# Circumradius of an inclusion in units of its size parameter. The
# size parameter is the radius for circles and triangles (vertices on
# the circumcircle) and the half-side for squares.
_CIRCUMRADIUS = {"circle": 1.0, "triangle": 1.0, "square": math.sqrt(2.0)}


@dataclass(frozen=True)
class Inclusion:
    shape: str
    center: tuple[float, float]
    size: float
    rotation: float
    sigma: float


@dataclass
class PhantomSpec:
    """One sampled phantom: background plus 1..n inclusions."""

    inclusions: list[Inclusion]
    background_sigma: float = 1.0


@dataclass(frozen=True)
class PhantomConfig:
    """Sampling distribution for random phantoms.

    Sizes are uniform in ``size_range``, counts uniform integers in
    ``count_range``, shapes and rotations uniform. Inclusions must fit
    entirely inside the unit disc; centers are rejection-sampled until
    they do. Inclusions share one conductivity contrast over a uniform
    background.
    """

    count_range: tuple[int, int] = (1, 3)
    size_range: tuple[float, float] = (0.1, 0.4)
    shapes: tuple[str, ...] = ("circle", "triangle", "square")
    inclusion_sigma: float = 2.5
    background_sigma: float = 1.0
    max_tries: int = 1000

    def validate(self) -> None:
        lo, hi = self.count_range
        if not (1 <= lo <= hi):
            raise ConfigurationError(f"bad inclusion count range {self.count_range}")
        slo, shi = self.size_range
        if not (0 < slo <= shi):
            raise ConfigurationError(f"bad size range {self.size_range}")
        for s in self.shapes:
            if s not in _CIRCUMRADIUS:
                raise ConfigurationError(f"unknown inclusion shape {s!r}")
        worst = slo * min(_CIRCUMRADIUS[s] for s in self.shapes)
        if worst >= 1.0:
            raise ConfigurationError(
                f"size range {self.size_range} cannot fit in the unit disc: "
                f"smallest possible circumradius is {worst:.3f}"
            )
        if self.inclusion_sigma <= 0 or self.background_sigma <= 0:
            raise ConfigurationError("conductivities must be positive")


def sample_phantom(seed: int, config: PhantomConfig = PhantomConfig()) -> PhantomSpec:
    """Draw one phantom from the configured distribution.

    The same seed always yields the same phantom; distinct seeds are
    drawn from independent streams.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    count = int(rng.integers(config.count_range[0], config.count_range[1] + 1))
    inclusions = []
    for _ in range(count):
        shape = config.shapes[int(rng.integers(len(config.shapes)))]
        for _ in range(config.max_tries):
            size = float(rng.uniform(*config.size_range))
            rotation = float(rng.uniform(0.0, 2.0 * math.pi))
            # Uniform in the disc: radius via the square-root trick.
            r = math.sqrt(float(rng.uniform()))
            theta = float(rng.uniform(0.0, 2.0 * math.pi))
            reach = size * _CIRCUMRADIUS[shape]
            if r + reach <= 1.0:
                inclusions.append(Inclusion(
                    shape=shape,
                    center=(r * math.cos(theta), r * math.sin(theta)),
                    size=size,
                    rotation=rotation,
                    sigma=config.inclusion_sigma,
                ))
                break
        else:
            raise ConfigurationError(
                f"could not place a {shape!r} inclusion after {config.max_tries} tries; "
                f"size range {config.size_range} is too tight for the disc"
            )
    return PhantomSpec(inclusions=inclusions, background_sigma=config.background_sigma)


def _inclusion_vertices(inc: Inclusion) -> np.ndarray:
    """Vertices of a polygonal inclusion, counterclockwise."""
    cx, cy = inc.center
    if inc.shape == "triangle":
        angles = inc.rotation + math.pi / 2.0 + 2.0 * math.pi * np.arange(3) / 3.0
        radius = inc.size
    elif inc.shape == "square":
        angles = inc.rotation + math.pi / 4.0 + 2.0 * math.pi * np.arange(4) / 4.0
        radius = inc.size * math.sqrt(2.0)
    else:
        raise DomainError(f"{inc.shape!r} has no vertices")
    return np.column_stack([
        cx + radius * np.cos(angles),
        cy + radius * np.sin(angles),
    ])


def contains(inc: Inclusion, points: np.ndarray) -> np.ndarray:
    """Boolean mask of points inside an inclusion (boundary included)."""
    pts = np.atleast_2d(points)
    cx, cy = inc.center
    if inc.shape == "circle":
        return (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2 <= inc.size ** 2
    verts = _inclusion_vertices(inc)
    inside = np.ones(pts.shape[0], dtype=bool)
    n = verts.shape[0]
    for i in range(n):
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % n]
        cross = (bx - ax) * (pts[:, 1] - ay) - (by - ay) * (pts[:, 0] - ax)
        inside &= cross >= 0.0
    return inside


def phantom_to_sigma(mesh: DiscMesh, spec: PhantomSpec) -> np.ndarray:
    """Per-element conductivity: centroid containment, first inclusion wins."""
    centroids = element_centroids(mesh)
    sigma = np.full(mesh.n_triangles, spec.background_sigma)
    unassigned = np.ones(mesh.n_triangles, dtype=bool)
    for inc in spec.inclusions:
        hit = contains(inc, centroids) & unassigned
        sigma[hit] = inc.sigma
        unassigned &= ~hit
    return sigma


def phantom_to_image(spec: PhantomSpec, size: int = IMAGE_SIZE) -> np.ndarray:
    """Binary ground-truth image, inclusions white on black.

    Pixel centers are sampled on the [-1, 1] square, row 0 at the top;
    pixels whose center falls outside the unit disc are always black.
    """
    xs = -1.0 + 2.0 * (np.arange(size) + 0.5) / size
    ys = 1.0 - 2.0 * (np.arange(size) + 0.5) / size
    px = np.broadcast_to(xs[None, :], (size, size)).ravel()
    py = np.broadcast_to(ys[:, None], (size, size)).ravel()
    pts = np.column_stack([px, py])
    mask = np.zeros(size * size, dtype=bool)
    for inc in spec.inclusions:
        mask |= contains(inc, pts)
    mask &= px * px + py * py <= 1.0
    return mask.reshape(size, size).astype(np.float64)


def save_image(path: str | Path, values: np.ndarray) -> None:
    """Write a [0, 1] gray array as an 8-bit grayscale PNG.

    Quantization is pixel = round(255 * value); no metadata is
    written, so identical arrays give byte-identical files.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeError(f"image must be 2-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError("image values must be finite and within [0, 1]")
    data = np.round(255.0 * arr).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def load_image(path: str | Path) -> np.ndarray:
    """Read a grayscale PNG back to float values in [0, 1]."""
    with Image.open(path) as img:
        data = np.asarray(img.convert("L"), dtype=np.float64)
    return data / 255.0


def phantom_to_json(spec: PhantomSpec) -> str:
    return json.dumps({
        "background_sigma": spec.background_sigma,
        "inclusions": [
            {
                "shape": inc.shape,
                "center": [inc.center[0], inc.center[1]],
                "size": inc.size,
                "rotation": inc.rotation,
                "sigma": inc.sigma,
            }
            for inc in spec.inclusions
        ],
    }, indent=2)


def phantom_from_json(text: str) -> PhantomSpec:
    try:
        raw = json.loads(text)
        inclusions = [
            Inclusion(
                shape=str(item["shape"]),
                center=(float(item["center"][0]), float(item["center"][1])),
                size=float(item["size"]),
                rotation=float(item["rotation"]),
                sigma=float(item["sigma"]),
            )
            for item in raw["inclusions"]
        ]
        return PhantomSpec(
            inclusions=inclusions,
            background_sigma=float(raw["background_sigma"]),
        )
    except (KeyError, IndexError, TypeError, ValueError) as err:
        raise DomainError(f"malformed phantom JSON: {err}") from err
