"""Shared fixtures: a small synthetic paired corpus.

The corpus mimics the reconstruction toolkit's output layout
(manifest.jsonl, inputs/{id}_{algo}.png, targets/{id}.png) at a
reduced 64-pixel grid so training-loop tests stay fast. Targets are
binary inclusion layouts clipped to the sensing disc; inputs are
blurred, lightly corrupted copies, so there is real structure to
learn but no dependency on the toolkit itself.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from PIL import Image, ImageFilter

from tomo_gan import GanConfig

SYNTH_SIZE = 64
SYNTH_ALGORITHMS = ("lbp", "tikhonov")
TEST_IDS = (3, 7)


def synth_target(seed: int, size: int = SYNTH_SIZE) -> np.ndarray:
    """Binary layout: one or two bright blobs inside the unit disc."""
    rng = np.random.default_rng(seed)
    axis = np.linspace(-1.0, 1.0, size)
    xx, yy = np.meshgrid(axis, -axis)
    img = np.zeros((size, size))
    for _ in range(int(rng.integers(1, 3))):
        cx, cy = rng.uniform(-0.5, 0.5, size=2)
        r = rng.uniform(0.15, 0.35)
        img[(xx - cx) ** 2 + (yy - cy) ** 2 <= r * r] = 1.0
    img[xx * xx + yy * yy > 1.0] = 0.0
    return img


def synth_input(target: np.ndarray, seed: int, blur: float = 3.0) -> np.ndarray:
    """A smeared stand-in for a classical reconstruction of ``target``."""
    rng = np.random.default_rng(seed + 10_000)
    img = Image.fromarray(np.round(255.0 * target).astype(np.uint8), mode="L")
    soft = np.asarray(img.filter(ImageFilter.GaussianBlur(blur)), dtype=np.float64) / 255.0
    noisy = soft + rng.normal(0.0, 0.02, soft.shape)
    return np.clip(noisy, 0.0, 1.0)


def write_corpus(root: Path,
                 count: int = 8,
                 algorithms: tuple[str, ...] = SYNTH_ALGORITHMS,
                 size: int = SYNTH_SIZE,
                 test_ids: tuple[int, ...] = TEST_IDS,
                 blur: float = 3.0) -> Path:
    """Build a corpus under ``root`` and return the manifest path."""
    (root / "inputs").mkdir(parents=True)
    (root / "targets").mkdir()
    lines = []
    for i in range(count):
        target = synth_target(seed=i, size=size)
        _save(root / f"targets/{i}.png", target)
        for k, algo in enumerate(algorithms):
            x = synth_input(target, seed=100 * i + k, blur=blur)
            _save(root / f"inputs/{i}_{algo}.png", x)
            lines.append({
                "id": i,
                "seed": 1000 + i,
                "algorithm": algo,
                "input_image": f"inputs/{i}_{algo}.png",
                "target_image": f"targets/{i}.png",
                "split": "test" if i in test_ids else "train",
                "phantom": {},
            })
    manifest = root / "manifest.jsonl"
    with open(manifest, "w") as fh:
        for line in lines:
            fh.write(json.dumps(line) + "\n")
    return manifest


def _save(path: Path, values: np.ndarray) -> None:
    Image.fromarray(np.round(255.0 * values).astype(np.uint8), mode="L").save(path)


@pytest.fixture(scope="session")
def synth_manifest(tmp_path_factory) -> Path:
    return write_corpus(tmp_path_factory.mktemp("corpus"))


@pytest.fixture(scope="session")
def small_config() -> GanConfig:
    # 64-pixel grid, five halvings, 6x6 patch map: the full architecture
    # at a fraction of the step cost.
    return GanConfig(image_size=SYNTH_SIZE, depth=5, patch_map_size=6,
                     epochs=2, checkpoint_epochs=(2,), seed=0)
