"""Conditional-GAN enhancement of tomographic reconstructions.

Consumes the paired corpus written by the reconstruction toolkit
(``manifest.jsonl`` plus PNGs) and learns a mapping from classical
reconstruction images to their ground-truth layouts: an encoder-
decoder generator with skip connections against a patch-wise
convolutional discriminator, trained on the adversarial score plus a
weighted L1 fidelity term.
"""

from .checkpoint import CheckpointInfo, load_checkpoint, save_checkpoint
from .config import CANONICAL_CHECKPOINTS, GanConfig
from .data import (ManifestRecord, PairDataset, TrainingSample, epoch_order,
                   load_image, read_manifest, save_image)
from .enhance import enhance
from .errors import (CheckpointError, ConfigurationError, DataError, GanError,
                     TrainingError)
from .networks import (PatchDiscriminator, UnetGenerator, build_discriminator,
                       build_generator)
from .train import EpochStats, train

__all__ = [
    "CANONICAL_CHECKPOINTS",
    "CheckpointError",
    "CheckpointInfo",
    "ConfigurationError",
    "DataError",
    "EpochStats",
    "GanConfig",
    "GanError",
    "ManifestRecord",
    "PairDataset",
    "PatchDiscriminator",
    "TrainingError",
    "TrainingSample",
    "UnetGenerator",
    "build_discriminator",
    "build_generator",
    "enhance",
    "epoch_order",
    "load_checkpoint",
    "load_image",
    "read_manifest",
    "save_checkpoint",
    "save_image",
    "train",
]

__version__ = "0.1.0"
