"""Applying a trained generator to reconstruction images.

Inference is stateless per image: dropout is off, features are
normalized from the image being processed, and images pass through
one at a time, so a given (checkpoint, file) pair always produces the
same bytes and filenames carry over unchanged.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterable

import numpy as np
import torch

from .checkpoint import load_checkpoint
from .data import load_image, save_image, signed_from_unit, unit_from_signed
from .errors import DataError

log = logging.getLogger(__name__)


def _input_paths(inputs: str | Path | Iterable[str | Path]) -> list[Path]:
    if isinstance(inputs, (str, Path)):
        root = Path(inputs)
        if not root.is_dir():
            raise DataError(f"input directory not found: {root}")
        paths = sorted(root.glob("*.png"))
    else:
        paths = [Path(p) for p in inputs]
    if not paths:
        raise DataError("no input images to enhance")
    return paths


def enhance(checkpoint: str | Path,
            inputs: str | Path | Iterable[str | Path],
            out_dir: str | Path) -> list[Path]:
    """Write one enhanced PNG per input and return the written paths.

    ``inputs`` is a directory (every ``*.png`` inside, sorted) or an
    explicit list of files. Output filenames equal input filenames.
    """
    generator, config, info = load_checkpoint(checkpoint)
    paths = _input_paths(inputs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    written = []
    with torch.no_grad():
        for path in paths:
            img = load_image(path)
            if img.shape != (config.image_size, config.image_size):
                raise DataError(
                    f"{path.name}: expected {config.image_size}x{config.image_size} "
                    f"input, got {img.shape[0]}x{img.shape[1]}"
                )
            x = torch.from_numpy(signed_from_unit(img).astype(np.float32)[None, None])
            y = generator(x)[0, 0].numpy()
            target = out / path.name
            save_image(target, unit_from_signed(y.astype(np.float64)))
            written.append(target)
    log.info("enhanced %d images with epoch-%d weights into %s", len(written), info.epoch, out)
    return written
