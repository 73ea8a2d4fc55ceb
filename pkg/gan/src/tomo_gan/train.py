"""Adversarial training of the enhancer.

Each step alternates one discriminator update (real pair scored
toward one, generated pair toward zero, halved so both networks see
comparable gradients) with one generator update on the adversarial
score plus the weighted picture-space L1 distance. Optimizers are
Adam with the configured rate and momentum pair for both networks.

Epoch sample order is a pure function of (seed, epoch), torch's
global generator is seeded once up front, and everything runs on the
requested device, so a run is reproducible end to end. The training
curve is appended to ``curve.csv`` as epochs finish and generator
snapshots are written at the configured checkpoint epochs.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .checkpoint import checkpoint_name, save_checkpoint
from .config import GanConfig
from .data import (PairDataset, epoch_order, read_manifest, signed_from_unit,
                   unit_from_signed)
from .errors import DataError, TrainingError
from .networks import build_discriminator, build_generator

log = logging.getLogger(__name__)

CURVE_NAME = "curve.csv"

_VAL_BATCH = 8


@dataclass(frozen=True)
class EpochStats:
    """Mean losses of one epoch plus the held-out reconstruction error.

    ``g_adversarial`` and ``g_fidelity`` are the two parts of
    ``g_loss`` before and after weighting; with a zero fidelity weight
    the logged ``g_loss`` is exactly the adversarial term.
    """

    epoch: int
    d_loss: float
    g_loss: float
    g_adversarial: float
    g_fidelity: float
    val_rmse: float


def _require_finite(value: float, name: str, epoch: int, step: int) -> None:
    if not math.isfinite(value):
        raise TrainingError(f"non-finite {name} loss at epoch {epoch}, step {step}")


def _split_tensors(pairs: PairDataset, device: torch.device) -> tuple[torch.Tensor, torch.Tensor]:
    if len(pairs) == 0:
        return torch.empty(0), torch.empty(0)
    def signed(stack: np.ndarray) -> torch.Tensor:
        return torch.from_numpy(signed_from_unit(stack).astype(np.float32)[:, None]).to(device)

    xs = np.stack([pairs.sample(i).x for i in range(len(pairs))])
    ys = np.stack([pairs.sample(i).y for i in range(len(pairs))])
    return signed(xs), signed(ys)


def _validation_rmse(generator: nn.Module, xs: torch.Tensor, ys: torch.Tensor) -> float:
    if xs.shape[0] == 0:
        return math.nan
    generator.eval()
    errors = []
    with torch.no_grad():
        for start in range(0, xs.shape[0], _VAL_BATCH):
            x = xs[start:start + _VAL_BATCH]
            y = ys[start:start + _VAL_BATCH]
            out = unit_from_signed(generator(x).cpu().numpy())
            truth = unit_from_signed(y.cpu().numpy())
            per_pair = np.sqrt(np.mean((out - truth) ** 2, axis=(1, 2, 3)))
            errors.extend(per_pair.tolist())
    generator.train()
    return float(np.mean(errors))


def train(manifest: str | Path,
          config: GanConfig,
          out_dir: str | Path,
          algorithm: str | None = None,
          device: str = "cpu") -> list[EpochStats]:
    """Run the full training loop and return per-epoch statistics.

    ``algorithm`` restricts the corpus to one reconstruction method;
    the default trains one model over every input algorithm. Writes
    ``curve.csv`` and ``epoch{N}.pt`` snapshots under ``out_dir``.
    """
    config.validate()
    manifest = Path(manifest)
    records = read_manifest(manifest)
    if algorithm is not None:
        available = sorted({r.algorithm for r in records})
        if algorithm not in available:
            raise DataError(f"manifest has no {algorithm!r} records; it holds {available}")
        records = [r for r in records if r.algorithm == algorithm]
    train_records = [r for r in records if r.split == "train"]
    if not train_records:
        raise DataError("manifest has no train-split records to learn from")
    val_records = [r for r in records if r.split == "test"]

    root = manifest.parent
    train_pairs = PairDataset(root, train_records)
    val_pairs = PairDataset(root, val_records)
    if train_pairs.image_size != config.image_size:
        raise DataError(
            f"corpus images are {train_pairs.image_size} per side, "
            f"configuration expects {config.image_size}"
        )

    dev = torch.device(device)
    torch.manual_seed(config.seed)
    generator = build_generator(config).to(dev)
    discriminator = build_discriminator(config).to(dev)
    generator.train()
    discriminator.train()
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, config.beta2))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, config.beta2))
    score_loss = nn.BCEWithLogitsLoss()
    fidelity_loss = nn.L1Loss()

    xs, ys = _split_tensors(train_pairs, dev)
    val_xs, val_ys = _split_tensors(val_pairs, dev)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    checkpoints = set(config.resolved_checkpoints())
    history: list[EpochStats] = []

    with open(out / CURVE_NAME, "w") as curve:
        curve.write("epoch,d_loss,g_loss,val_rmse\n")
        curve.flush()
        for epoch in range(1, config.epochs + 1):
            order = epoch_order(len(train_pairs), config.seed, epoch)
            sums = {"d": 0.0, "g": 0.0, "adv": 0.0, "fid": 0.0}
            n_steps = 0
            for step, start in enumerate(range(0, len(order), config.batch_size), start=1):
                idx = torch.from_numpy(order[start:start + config.batch_size].copy())
                x, y = xs[idx], ys[idx]
                generated = generator(x)

                real_score = discriminator(x, y)
                fake_score = discriminator(x, generated.detach())
                d_loss = 0.5 * (score_loss(real_score, torch.ones_like(real_score))
                                + score_loss(fake_score, torch.zeros_like(fake_score)))
                opt_d.zero_grad()
                d_loss.backward()
                opt_d.step()

                regrade = discriminator(x, generated)
                g_adv = score_loss(regrade, torch.ones_like(regrade))
                g_fid = fidelity_loss(generated, y)
                g_loss = g_adv + config.l1_weight * g_fid
                opt_g.zero_grad()
                g_loss.backward()
                opt_g.step()

                d_val = float(d_loss.detach())
                g_val = float(g_loss.detach())
                _require_finite(d_val, "discriminator", epoch, step)
                _require_finite(g_val, "generator", epoch, step)
                sums["d"] += d_val
                sums["g"] += g_val
                sums["adv"] += float(g_adv.detach())
                sums["fid"] += float(g_fid.detach())
                n_steps += 1

            stats = EpochStats(
                epoch=epoch,
                d_loss=sums["d"] / n_steps,
                g_loss=sums["g"] / n_steps,
                g_adversarial=sums["adv"] / n_steps,
                g_fidelity=sums["fid"] / n_steps,
                val_rmse=_validation_rmse(generator, val_xs, val_ys),
            )
            history.append(stats)
            curve.write(f"{epoch},{stats.d_loss:.6g},{stats.g_loss:.6g},{stats.val_rmse:.6g}\n")
            curve.flush()
            log.info("epoch %d/%d: d=%.4f g=%.4f val_rmse=%.4f",
                     epoch, config.epochs, stats.d_loss, stats.g_loss, stats.val_rmse)

            if epoch in checkpoints:
                target = out / checkpoint_name(epoch)
                save_checkpoint(target, generator, config, epoch, algorithm)
                log.info("saved %s", target)

    return history
