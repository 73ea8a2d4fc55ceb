"""Paired-corpus access.

The corpus format is the coupling surface to the reconstruction
toolkit: a ``manifest.jsonl`` whose lines name one reconstruction PNG
and its ground-truth PNG, with paths relative to the manifest's
directory. Only that file contract is consumed here; nothing imports
the toolkit itself.

Images live in [0, 1] on disk and in [-1, 1] inside the networks; the
two helpers at the bottom are the only place that mapping exists.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DataError

MANIFEST_NAME = "manifest.jsonl"

_RECORD_KEYS = ("id", "algorithm", "input_image", "target_image", "split")


@dataclass(frozen=True)
class ManifestRecord:
    """One manifest line, paths still relative to the corpus root."""

    id: int
    algorithm: str
    input_image: str
    target_image: str
    split: str


@dataclass(frozen=True)
class TrainingSample:
    """A decoded (reconstruction, ground truth) pair in [0, 1]."""

    x: np.ndarray
    y: np.ndarray
    id: int
    algorithm: str


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    """Parse a manifest file into records, tolerating blank lines."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"manifest not found: {path}")
    records = []
    with open(path) as fh:
        for n, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as err:
                raise DataError(f"manifest line {n} is not valid JSON: {err}") from err
            if not isinstance(raw, dict) or any(k not in raw for k in _RECORD_KEYS):
                raise DataError(f"manifest line {n} lacks the required record fields")
            records.append(ManifestRecord(
                id=int(raw["id"]),
                algorithm=str(raw["algorithm"]),
                input_image=str(raw["input_image"]),
                target_image=str(raw["target_image"]),
                split=str(raw["split"]),
            ))
    return records


def load_image(path: str | Path) -> np.ndarray:
    """Read a grayscale PNG to float values in [0, 1]."""
    try:
        with Image.open(path) as img:
            data = np.asarray(img.convert("L"), dtype=np.float32)
    except OSError as err:
        raise DataError(f"unreadable image {path}: {err}") from err
    return data / 255.0


def save_image(path: str | Path, values: np.ndarray) -> None:
    """Write a [0, 1] gray array as an 8-bit grayscale PNG.

    Same quantization as the corpus writer, pixel = round(255 * value)
    with no metadata, so equal arrays give byte-identical files.
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DataError(f"image must be 2-d, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise DataError("image values must be finite and within [0, 1]")
    data = np.round(255.0 * arr).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


class PairDataset:
    """All pairs of one split, decoded once and held in memory.

    Ground-truth images are shared between the reconstructions of one
    phantom, so decoding is cached per path.
    """

    def __init__(self, root: str | Path, records: list[ManifestRecord]) -> None:
        self.root = Path(root)
        self.records = list(records)
        cache: dict[str, np.ndarray] = {}
        self._pairs = [
            (self._decode(r.input_image, cache), self._decode(r.target_image, cache))
            for r in self.records
        ]

    def _decode(self, rel: str, cache: dict[str, np.ndarray]) -> np.ndarray:
        if rel not in cache:
            img = load_image(self.root / rel)
            if img.ndim != 2 or img.shape[0] != img.shape[1]:
                raise DataError(f"image {rel} is not square, got shape {img.shape}")
            cache[rel] = img
        return cache[rel]

    def __len__(self) -> int:
        return len(self.records)

    @property
    def image_size(self) -> int:
        return self._pairs[0][0].shape[0] if self._pairs else 0

    def sample(self, i: int) -> TrainingSample:
        rec = self.records[i]
        x, y = self._pairs[i]
        return TrainingSample(x=x, y=y, id=rec.id, algorithm=rec.algorithm)


def epoch_order(count: int, seed: int, epoch: int) -> np.ndarray:
    """Sample visiting order for one epoch.

    A pure function of (seed, epoch): data loading may be parallel or
    batched without changing which pair is seen at which step.
    """
    return np.random.default_rng((seed, epoch)).permutation(count)


def signed_from_unit(values: np.ndarray) -> np.ndarray:
    """Map file-range [0, 1] to the network range [-1, 1]."""
    return 2.0 * values - 1.0


def unit_from_signed(values: np.ndarray) -> np.ndarray:
    """Map network output back to [0, 1], clamping float fuzz."""
    return np.clip(0.5 * (values + 1.0), 0.0, 1.0)
