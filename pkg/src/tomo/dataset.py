"""Paired (reconstruction, ground truth) corpus generation.

One sample id drives the whole chain: phantom from seed base_seed+id,
per-element conductivity, forward simulation, normalized frame, one
reconstruction image per requested algorithm, plus the shared binary
target image. Every file and manifest line is a pure function of the
generation parameters, so repeated runs are byte-identical whatever
the thread count.

Train/test membership hangs off the phantom, not the image, so the
up-to-three reconstructions of one phantom can never straddle the
split.
"""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import recon
from .errors import ConfigurationError, TomoError
from .forward import GaugedSolver, MeasurementProtocol, adjacent_protocol
from .mesh import DiscMesh, build_disc_mesh
from .phantom import (PhantomConfig, PhantomSpec, phantom_from_json,
                      phantom_to_image, phantom_to_json, phantom_to_sigma,
                      sample_phantom, save_image)
from .sensitivity import cached_sensitivity, normalize_frame

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.jsonl"
CONFIG_NAME = "config.json"

_RECONSTRUCTORS = {
    "lbp": lambda u, s: recon.lbp(u, s),
    "landweber": lambda u, s: recon.landweber(u, s),
    "tikhonov": lambda u, s: recon.tikhonov(u, s),
}


@dataclass(frozen=True)
class DatasetRecord:
    """One manifest line: a reconstruction image and its target."""

    id: int
    seed: int
    algorithm: str
    input_image: str
    target_image: str
    split: str
    phantom: PhantomSpec


@dataclass
class DatasetManifest:
    records: list[DatasetRecord]
    config: dict = field(default_factory=dict)

    def subset(self, split: str | None = None) -> list[DatasetRecord]:
        if split is None:
            return list(self.records)
        return [r for r in self.records if r.split == split]


def split_assignment(sample_id: int, base_seed: int, test_fraction: float) -> str:
    """Hash-based train/test membership for one phantom.

    Keyed on (base_seed, phantom seed): deterministic, independent of
    corpus size and algorithm list, with expected test proportion
    equal to the fraction.
    """
    if not (0.0 <= test_fraction < 1.0):
        raise ConfigurationError(f"test fraction must be in [0, 1), got {test_fraction}")
    return "test" if _split_score(sample_id, base_seed) < test_fraction else "train"


def _split_score(sample_id: int, base_seed: int) -> float:
    digest = hashlib.sha256(f"split:{base_seed}:{base_seed + sample_id}".encode()).digest()
    return int.from_bytes(digest[:8], "little") / 2.0 ** 64


def _calibrated_splits(count: int, base_seed: int, test_fraction: float) -> list[str]:
    # Exact-count variant of split_assignment used for whole corpora:
    # the round(count * fraction) smallest hash scores become the test
    # set, so the realized fraction is within half a record of the
    # request instead of binomially scattered around it.
    scores = [(_split_score(i, base_seed), i) for i in range(count)]
    n_test = int(round(count * test_fraction))
    test_ids = {i for _, i in sorted(scores)[:n_test]}
    return ["test" if i in test_ids else "train" for i in range(count)]


def generate_dataset(count: int,
                     out_dir: str | Path,
                     algorithms: tuple[str, ...] = ("lbp", "landweber", "tikhonov"),
                     base_seed: int = 0,
                     test_fraction: float = 0.3,
                     mesh: DiscMesh | None = None,
                     protocol: MeasurementProtocol | None = None,
                     phantom_config: PhantomConfig = PhantomConfig(),
                     threads: int = 1) -> DatasetManifest:
    """Generate a corpus under out_dir and return its manifest.

    Writes inputs/{id}_{algo}.png, targets/{id}.png, manifest.jsonl,
    and config.json. Reconstruction defaults are the module defaults
    of the three algorithms; the config snapshot records them.
    """
    if count < 1:
        raise ConfigurationError(f"sample count must be >= 1, got {count}")
    if not algorithms:
        raise ConfigurationError("need at least one reconstruction algorithm")
    for name in algorithms:
        if name not in _RECONSTRUCTORS:
            raise ConfigurationError(
                f"unknown algorithm {name!r}; choose from {sorted(_RECONSTRUCTORS)}"
            )
    if not (0.0 <= test_fraction < 1.0):
        raise ConfigurationError(f"test fraction must be in [0, 1), got {test_fraction}")
    if threads < 1:
        raise ConfigurationError(f"thread count must be >= 1, got {threads}")
    phantom_config.validate()

    if mesh is None:
        mesh = build_disc_mesh()
    if protocol is None:
        protocol = adjacent_protocol(mesh.n_electrodes)

    out = Path(out_dir)
    (out / "inputs").mkdir(parents=True, exist_ok=True)
    (out / "targets").mkdir(parents=True, exist_ok=True)

    log.info("computing background sensitivity (%d measurements, %d elements)",
             protocol.n_measurements, mesh.n_triangles)
    matrix = cached_sensitivity(mesh, phantom_config.background_sigma, protocol)
    background = GaugedSolver(mesh, np.full(mesh.n_triangles, phantom_config.background_sigma))
    reference = background.frame(protocol)

    splits = _calibrated_splits(count, base_seed, test_fraction)

    def build_sample(i: int) -> list[DatasetRecord]:
        seed = base_seed + i
        try:
            spec = sample_phantom(seed, phantom_config)
            sigma = phantom_to_sigma(mesh, spec)
            frame = GaugedSolver(mesh, sigma).frame(protocol)
            u = normalize_frame(frame, reference)
            target_rel = f"targets/{i}.png"
            save_image(out / target_rel, phantom_to_image(spec))
            records = []
            for name in algorithms:
                g = _RECONSTRUCTORS[name](u, matrix)
                input_rel = f"inputs/{i}_{name}.png"
                save_image(out / input_rel, recon.rasterize(mesh, g))
                records.append(DatasetRecord(
                    id=i,
                    seed=seed,
                    algorithm=name,
                    input_image=input_rel,
                    target_image=target_rel,
                    split=splits[i],
                    phantom=spec,
                ))
        except TomoError as err:
            raise type(err)(f"sample {i}: {err}") from err
        log.info("sample %d done", i)
        return records

    if threads == 1:
        per_sample = [build_sample(i) for i in range(count)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_sample = list(pool.map(build_sample, range(count)))

    records = [rec for sample in per_sample for rec in sample]
    config = {
        "count": count,
        "algorithms": list(algorithms),
        "base_seed": base_seed,
        "test_fraction": test_fraction,
        "n_rings": mesh.n_rings,
        "n_electrodes": mesh.n_electrodes,
        "protocol": protocol.tag,
        "background_sigma": phantom_config.background_sigma,
        "inclusion_sigma": phantom_config.inclusion_sigma,
        "count_range": list(phantom_config.count_range),
        "size_range": list(phantom_config.size_range),
        "shapes": list(phantom_config.shapes),
        "landweber_iterations": recon.DEFAULT_ITERATIONS,
        "tikhonov_regularization": recon.default_regularization(matrix),
        "image_size": recon.IMAGE_SIZE,
    }
    manifest = DatasetManifest(records=records, config=config)
    save_manifest(manifest, out)
    return manifest


def _record_to_json(rec: DatasetRecord) -> str:
    return json.dumps({
        "id": rec.id,
        "seed": rec.seed,
        "algorithm": rec.algorithm,
        "input_image": rec.input_image,
        "target_image": rec.target_image,
        "split": rec.split,
        "phantom": json.loads(phantom_to_json(rec.phantom)),
    })


def save_manifest(manifest: DatasetManifest, out_dir: str | Path) -> None:
    out = Path(out_dir)
    with open(out / MANIFEST_NAME, "w") as fh:
        for rec in manifest.records:
            fh.write(_record_to_json(rec) + "\n")
    with open(out / CONFIG_NAME, "w") as fh:
        json.dump(manifest.config, fh, indent=2)
        fh.write("\n")


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read manifest.jsonl (config.json alongside it, if present)."""
    path = Path(path)
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            records.append(DatasetRecord(
                id=int(raw["id"]),
                seed=int(raw["seed"]),
                algorithm=str(raw["algorithm"]),
                input_image=str(raw["input_image"]),
                target_image=str(raw["target_image"]),
                split=str(raw["split"]),
                phantom=phantom_from_json(json.dumps(raw["phantom"])),
            ))
    config_path = path.parent / CONFIG_NAME
    config = json.loads(config_path.read_text()) if config_path.exists() else {}
    return DatasetManifest(records=records, config=config)
