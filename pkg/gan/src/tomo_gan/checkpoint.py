"""Saving and restoring generator snapshots.

A checkpoint is a single file holding the format tag, the full
configuration the run was trained under, the epoch number, the
algorithm filter (if any), and the generator weights. Loading rebuilds
the network from the stored configuration before touching the weight
blob, so any mismatch surfaces as a checkpoint error naming the cause
instead of a shape exception mid-load.
"""

from __future__ import annotations

import pickle
import zipfile
from dataclasses import dataclass
from pathlib import Path

import torch

from .config import GanConfig, config_from_dict, config_to_dict
from .errors import CheckpointError, ConfigurationError
from .networks import UnetGenerator, build_generator

CHECKPOINT_FORMAT = 1

_REQUIRED_KEYS = ("format", "epoch", "algorithm", "config", "generator")


@dataclass(frozen=True)
class CheckpointInfo:
    """Provenance stored alongside the weights."""

    epoch: int
    algorithm: str | None


def checkpoint_name(epoch: int) -> str:
    return f"epoch{epoch}.pt"


def save_checkpoint(path: str | Path,
                    generator: UnetGenerator,
                    config: GanConfig,
                    epoch: int,
                    algorithm: str | None = None) -> None:
    torch.save({
        "format": CHECKPOINT_FORMAT,
        "epoch": int(epoch),
        "algorithm": algorithm,
        "config": config_to_dict(config),
        "generator": {k: v.cpu() for k, v in generator.state_dict().items()},
    }, path)


def _resolve(path: str | Path) -> Path:
    # The documented handle is the bare epoch name; the stored file
    # carries the extension.
    p = Path(path)
    for candidate in (p, p.with_name(p.name + ".pt")):
        if candidate.is_file():
            return candidate
    raise CheckpointError(f"checkpoint not found: {path}")


def load_checkpoint(path: str | Path) -> tuple[UnetGenerator, GanConfig, CheckpointInfo]:
    """Restore a generator in inference mode from a saved snapshot."""
    file = _resolve(path)
    try:
        raw = torch.load(file, map_location="cpu", weights_only=True)
    except (RuntimeError, OSError, ValueError, EOFError,
            pickle.UnpicklingError, zipfile.BadZipFile) as err:
        raise CheckpointError(f"{file} is not a readable checkpoint: {err}") from err
    if not isinstance(raw, dict) or "format" not in raw:
        raise CheckpointError(f"{file} is not a checkpoint produced by this tool")
    if raw["format"] != CHECKPOINT_FORMAT:
        raise CheckpointError(
            f"checkpoint format {raw['format']!r} is not supported by this version "
            f"(expected {CHECKPOINT_FORMAT})"
        )
    missing = [k for k in _REQUIRED_KEYS if k not in raw]
    if missing:
        raise CheckpointError(f"checkpoint {file} lacks required entries {missing}")
    config = config_from_dict(raw["config"])
    try:
        net = build_generator(config)
    except ConfigurationError as err:
        raise CheckpointError(f"stored settings cannot be instantiated: {err}") from err
    try:
        net.load_state_dict(raw["generator"])
    except (RuntimeError, AttributeError, TypeError) as err:
        raise CheckpointError(
            f"weights in {file} do not match the declared architecture: {err}"
        ) from err
    net.eval()
    info = CheckpointInfo(epoch=int(raw["epoch"]), algorithm=raw["algorithm"])
    return net, config, info
