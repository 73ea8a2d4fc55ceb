"""Training and architecture settings.

One dataclass carries everything a run needs, so a checkpoint can
store the exact configuration it was trained under and the loader can
rebuild the same network shape before touching any weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

from .errors import CheckpointError, ConfigurationError

# Epoch ladder matching the comparison figures; trimmed to the epoch
# budget when the caller does not pick explicit checkpoints.
CANONICAL_CHECKPOINTS = (25, 50, 100, 200)


@dataclass(frozen=True)
class GanConfig:
    """Settings for training and applying the enhancer.

    ``checkpoint_epochs=None`` means the canonical ladder clipped to
    ``epochs``; an explicit list must be strictly ascending and stay
    within the epoch budget. ``depth`` counts generator downsampling
    halvings, ``patch_map_size`` is the per-side score count of the
    discriminator output.
    """

    l1_weight: float = 100.0
    epochs: int = 100
    checkpoint_epochs: tuple[int, ...] | None = None
    batch_size: int = 1
    learning_rate: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    patch_map_size: int = 30
    depth: int = 8
    image_size: int = 256
    seed: int = 0

    def validate(self) -> None:
        if not (math.isfinite(self.l1_weight) and self.l1_weight >= 0.0):
            raise ConfigurationError(f"fidelity weight must be >= 0, got {self.l1_weight}")
        if self.epochs < 1:
            raise ConfigurationError(f"epoch count must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch size must be >= 1, got {self.batch_size}")
        if not (math.isfinite(self.learning_rate) and self.learning_rate > 0.0):
            raise ConfigurationError(f"learning rate must be > 0, got {self.learning_rate}")
        for name, beta in (("beta1", self.beta1), ("beta2", self.beta2)):
            if not (0.0 <= beta < 1.0):
                raise ConfigurationError(f"{name} must be in [0, 1), got {beta}")
        if self.depth < 2:
            raise ConfigurationError(f"generator depth must be >= 2, got {self.depth}")
        if self.patch_map_size < 2:
            raise ConfigurationError(
                f"patch map must score more than one patch per side, got {self.patch_map_size}"
            )
        if self.image_size < 4:
            raise ConfigurationError(f"image size must be >= 4, got {self.image_size}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be >= 0, got {self.seed}")
        ladder = self.checkpoint_epochs
        if ladder is not None:
            if not ladder:
                raise ConfigurationError("explicit checkpoint list must not be empty")
            if any(e < 1 for e in ladder):
                raise ConfigurationError(f"checkpoint epochs must be >= 1, got {list(ladder)}")
            if list(ladder) != sorted(set(ladder)):
                raise ConfigurationError(
                    f"checkpoint epochs must be strictly ascending, got {list(ladder)}"
                )
            if ladder[-1] > self.epochs:
                raise ConfigurationError(
                    f"checkpoint epoch {ladder[-1]} exceeds the epoch budget {self.epochs}"
                )

    def resolved_checkpoints(self) -> tuple[int, ...]:
        """Epochs at which generator weights are saved."""
        if self.checkpoint_epochs is not None:
            return tuple(self.checkpoint_epochs)
        return tuple(e for e in CANONICAL_CHECKPOINTS if e <= self.epochs)


def config_to_dict(config: GanConfig) -> dict:
    """Plain-value form used inside checkpoints and run summaries."""
    raw = asdict(config)
    if raw["checkpoint_epochs"] is not None:
        raw["checkpoint_epochs"] = list(raw["checkpoint_epochs"])
    return raw


def config_from_dict(raw: dict) -> GanConfig:
    """Rebuild a configuration stored by :func:`config_to_dict`.

    A key set that does not round-trip means the artifact was written
    by an incompatible version, so the mismatch is a checkpoint error
    rather than a configuration error.
    """
    expected = {f.name for f in fields(GanConfig)}
    if set(raw) != expected:
        missing = sorted(expected - set(raw))
        extra = sorted(set(raw) - expected)
        raise CheckpointError(
            f"stored settings do not match this version (missing {missing}, unknown {extra})"
        )
    values = dict(raw)
    if values["checkpoint_epochs"] is not None:
        values["checkpoint_epochs"] = tuple(int(e) for e in values["checkpoint_epochs"])
    config = GanConfig(**values)
    try:
        config.validate()
    except ConfigurationError as err:
        raise CheckpointError(f"stored settings are not valid: {err}") from err
    return config
