"""Command-line front end for the tomography toolkit.

One executable, one subcommand per pipeline stage: mesh, phantom
(sample and render), simulate, sensitivity, reconstruct, dataset gen,
eval, and compare. Machine-readable results go to standard out;
progress and diagnostics go to the error stream, silenced by
``--quiet``. Exit codes: 0 on success, 2 on usage errors, 1 on
runtime failures (the message names the failing subcommand).

The flags ``--quiet``, ``--threads``, and ``--seed`` are accepted
both before and after the subcommand name.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import dataset as dataset_mod
from . import metrics as metrics_mod
from . import recon as recon_mod
from .errors import ConfigurationError, DomainError, TomoError
from .forward import (GaugedSolver, MeasurementProtocol, adjacent_protocol,
                      load_frame, opposite_protocol, save_frame)
from .mesh import build_disc_mesh, load_mesh, save_mesh
from .phantom import (PhantomConfig, load_image, phantom_from_json,
                      phantom_to_image, phantom_to_json, phantom_to_sigma,
                      sample_phantom, save_image)
from .sensitivity import compute_sensitivity, load_matrix, normalize_frame, save_matrix

log = logging.getLogger(__name__)

_METRIC_NAMES = ("rmse", "ssim", "psnr")


def _add_shared_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS keeps a flag given before the subcommand from being
    # clobbered by the subparser's default.
    parser.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS,
                        help="silence progress diagnostics")
    parser.add_argument("--threads", type=int, metavar="N", default=argparse.SUPPRESS,
                        help="worker threads, 0 = one per CPU (default 1)")
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="base random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomo",
        description="Simulate, reconstruct, score, and export ERT image data.",
    )
    _add_shared_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("mesh", help="build a disc mesh and write it to a file")
    p.add_argument("--rings", type=int, default=16)
    p.add_argument("--electrodes", type=int, default=32)
    p.add_argument("--coverage", type=float, default=0.5,
                   help="electrode arc width as a fraction of its pitch")
    p.add_argument("--out", required=True, metavar="MESH.tmsh")
    _add_shared_flags(p)

    p = sub.add_parser("phantom", help="sample a random phantom, or render one to a PNG")
    p.add_argument("--out", metavar="PHANTOM.json")
    _add_shared_flags(p)
    psub = p.add_subparsers(dest="phantom_command", metavar="render")
    pr = psub.add_parser("render", help="rasterize a phantom document to its ground-truth image")
    pr.add_argument("--in", dest="infile", required=True, metavar="PHANTOM.json")
    pr.add_argument("--out", required=True, metavar="TRUTH.png")
    _add_shared_flags(pr)

    p = sub.add_parser("simulate", help="solve the forward model for one conductivity field")
    p.add_argument("--mesh", required=True, metavar="MESH.tmsh")
    p.add_argument("--sigma", required=True, metavar="FIELD.json",
                   help="phantom document, or a JSON array of per-element conductivities")
    p.add_argument("--protocol", choices=("adjacent", "opposite"), default="adjacent")
    p.add_argument("--out", required=True, metavar="FRAME.tfrm")
    _add_shared_flags(p)

    p = sub.add_parser("sensitivity", help="compute the linearized sensitivity matrix")
    p.add_argument("--mesh", required=True, metavar="MESH.tmsh")
    p.add_argument("--protocol", choices=("adjacent", "opposite"), default="adjacent")
    p.add_argument("--background", type=float, default=1.0)
    p.add_argument("--out", required=True, metavar="S.tsns")
    _add_shared_flags(p)

    p = sub.add_parser("reconstruct", help="reconstruct an element image from a frame")
    p.add_argument("--algo", choices=recon_mod.ALGORITHMS, required=True)
    p.add_argument("--frame", required=True, metavar="FRAME.tfrm",
                   help="raw simulated frame; it is normalized against the "
                        "matrix's background internally")
    p.add_argument("--sens", required=True, metavar="S.tsns")
    p.add_argument("--mesh", required=True, metavar="MESH.tmsh")
    p.add_argument("--iters", type=int, default=recon_mod.DEFAULT_ITERATIONS,
                   help="Landweber iteration count")
    p.add_argument("--step-size", type=float, default=None,
                   help="Landweber gain; derived from the matrix when absent")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="Tikhonov regularization weight; scale-aware default when absent")
    p.add_argument("--binarize", action="store_true",
                   help="threshold the Tikhonov image at 0.5")
    p.add_argument("--out", required=True, metavar="RECON.png")
    _add_shared_flags(p)

    p = sub.add_parser("dataset", help="dataset corpus operations")
    dsub = p.add_subparsers(dest="dataset_command", required=True, metavar="gen")
    dg = dsub.add_parser("gen", help="generate a paired reconstruction/truth corpus")
    dg.add_argument("--count", type=int, required=True,
                    help="number of phantoms (each yields one image per algorithm)")
    dg.add_argument("--algos", default="lbp,landweber,tikhonov",
                    help="comma-separated reconstruction algorithms")
    dg.add_argument("--test-fraction", type=float, default=0.3)
    dg.add_argument("--out-dir", required=True)
    _add_shared_flags(dg)

    p = sub.add_parser("eval", help="score image pairs with RMSE/SSIM/PSNR")
    p.add_argument("--pred", metavar="RECON.png")
    p.add_argument("--truth", metavar="TRUTH.png")
    p.add_argument("--metrics", default="rmse,ssim,psnr",
                   help="comma-separated subset, output order follows it")
    p.add_argument("--manifest", metavar="MANIFEST.jsonl",
                   help="batch mode: score every manifest pair")
    p.add_argument("--split", choices=("train", "test", "all"), default="all",
                   help="batch mode: restrict to one split")
    p.add_argument("--algo", choices=("lbp", "landweber", "tikhonov"),
                   help="batch mode: restrict to one algorithm")
    p.add_argument("--pred-dir", metavar="DIR",
                   help="batch mode: score DIR/{id}_{algo}.png instead of the "
                        "manifest inputs (e.g. an enhanced-image directory)")
    p.add_argument("--out", metavar="METRICS.csv",
                   help="batch mode: CSV destination (default standard out)")
    _add_shared_flags(p)

    p = sub.add_parser("compare", help="assemble a truth/reconstruction grid image")
    p.add_argument("--manifest", required=True, metavar="MANIFEST.jsonl")
    p.add_argument("--ids", required=True, help="comma-separated sample ids, one column each")
    p.add_argument("--algo", help="comma-separated algorithm rows (default: all in the manifest)")
    p.add_argument("--enhanced", action="append", default=[], metavar="DIR",
                   help="add a row of DIR/{id}_{algo}.png images; repeatable")
    p.add_argument("--out", required=True, metavar="FIG.png")
    _add_shared_flags(p)

    return parser


def _resolve_threads(value: int) -> int:
    if value < 0:
        raise ConfigurationError(f"thread count must be >= 0, got {value}")
    return value if value > 0 else (os.cpu_count() or 1)


def _load_sigma(path: str, n_elements: int) -> np.ndarray | None:
    """Per-element conductivities from a field document, or None if the
    document is a phantom (mapped by the caller, which owns the mesh)."""
    raw = json.loads(Path(path).read_text())
    if isinstance(raw, dict) and "inclusions" in raw:
        return None
    values = raw.get("values") if isinstance(raw, dict) else raw
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != n_elements:
        raise DomainError(
            f"sigma document {path} holds {arr.shape} values, expected {n_elements}"
        )
    return arr


def _infer_protocol(n_electrodes: int, n_measurements: int) -> MeasurementProtocol:
    adjacent = adjacent_protocol(n_electrodes)
    if adjacent.n_measurements == n_measurements:
        return adjacent
    if n_electrodes % 2 == 0:
        opposite = opposite_protocol(n_electrodes)
        if opposite.n_measurements == n_measurements:
            return opposite
    raise DomainError(
        f"frame with {n_measurements} values matches neither the adjacent nor "
        f"the opposite protocol for {n_electrodes} electrodes"
    )


def _cmd_mesh(args: argparse.Namespace) -> int:
    mesh = build_disc_mesh(args.rings, args.electrodes, args.coverage)
    save_mesh(mesh, args.out)
    log.info("wrote %s: %d nodes, %d triangles, %d electrodes",
             args.out, mesh.n_nodes, mesh.n_triangles, mesh.n_electrodes)
    return 0


def _cmd_phantom(args: argparse.Namespace, seed: int) -> int:
    if args.phantom_command == "render":
        spec = phantom_from_json(Path(args.infile).read_text())
        save_image(args.out, phantom_to_image(spec))
        log.info("wrote %s", args.out)
        return 0
    if not args.out:
        raise ConfigurationError("--out is required when sampling a phantom")
    spec = sample_phantom(seed, PhantomConfig())
    Path(args.out).write_text(phantom_to_json(spec) + "\n")
    log.info("wrote %s: %d inclusion(s)", args.out, len(spec.inclusions))
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    mesh = load_mesh(args.mesh)
    sigma = _load_sigma(args.sigma, mesh.n_triangles)
    if sigma is None:
        spec = phantom_from_json(Path(args.sigma).read_text())
        sigma = phantom_to_sigma(mesh, spec)
    builder = adjacent_protocol if args.protocol == "adjacent" else opposite_protocol
    protocol = builder(mesh.n_electrodes)
    frame = GaugedSolver(mesh, sigma).frame(protocol)
    save_frame(frame, args.out)
    log.info("wrote %s: %d measurements (%s)", args.out, len(frame.values), protocol.tag)
    return 0


def _cmd_sensitivity(args: argparse.Namespace) -> int:
    mesh = load_mesh(args.mesh)
    builder = adjacent_protocol if args.protocol == "adjacent" else opposite_protocol
    protocol = builder(mesh.n_electrodes)
    matrix = compute_sensitivity(mesh, args.background, protocol)
    save_matrix(matrix, args.out)
    log.info("wrote %s: %d x %d", args.out, matrix.n_measurements, matrix.n_elements)
    return 0


def _cmd_reconstruct(args: argparse.Namespace) -> int:
    mesh = load_mesh(args.mesh)
    matrix = load_matrix(args.sens)
    frame = load_frame(args.frame)
    if len(frame.values) != matrix.n_measurements:
        raise DomainError(
            f"frame has {len(frame.values)} values but the matrix expects "
            f"{matrix.n_measurements}"
        )
    protocol = _infer_protocol(mesh.n_electrodes, matrix.n_measurements)
    background = GaugedSolver(
        mesh, np.full(mesh.n_triangles, matrix.background)
    ).frame(protocol)
    u = normalize_frame(frame, background)
    if args.algo == "lbp":
        g = recon_mod.lbp(u, matrix)
    elif args.algo == "landweber":
        g = recon_mod.landweber(u, matrix, iterations=args.iters,
                                step_size=args.step_size)
    else:
        g = recon_mod.tikhonov(u, matrix, regularization=args.lam,
                               binarize=args.binarize)
    save_image(args.out, recon_mod.rasterize(mesh, g))
    log.info("wrote %s (%s)", args.out, args.algo)
    return 0


def _cmd_dataset_gen(args: argparse.Namespace, seed: int, threads: int) -> int:
    algorithms = tuple(name.strip() for name in args.algos.split(",") if name.strip())
    dataset_mod.generate_dataset(
        args.count,
        args.out_dir,
        algorithms=algorithms,
        base_seed=seed,
        test_fraction=args.test_fraction,
        threads=threads,
    )
    log.info("wrote corpus to %s", args.out_dir)
    return 0


def _parse_metric_names(raw: str) -> list[str]:
    names = [name.strip() for name in raw.split(",") if name.strip()]
    for name in names:
        if name not in _METRIC_NAMES:
            raise ConfigurationError(
                f"unknown metric {name!r}; choose from {_METRIC_NAMES}"
            )
    if not names:
        raise ConfigurationError("need at least one metric")
    return names


def _metric_values(truth: np.ndarray, pred: np.ndarray, names: list[str]) -> list[float]:
    values = []
    for name in names:
        if name == "rmse":
            values.append(metrics_mod.rmse(truth, pred))
        elif name == "ssim":
            values.append(metrics_mod.ssim(truth, pred))
        else:
            values.append(metrics_mod.psnr(truth, pred))
    return values


def _format_value(v: float) -> str:
    if math.isinf(v):
        return "inf"
    return f"{v:.6g}"


def _cmd_eval(args: argparse.Namespace) -> int:
    names = _parse_metric_names(args.metrics)
    if args.manifest:
        return _eval_batch(args, names)
    if not (args.pred and args.truth):
        raise ConfigurationError("eval needs --pred and --truth, or --manifest")
    pred = load_image(args.pred)
    truth = load_image(args.truth)
    print(",".join(_format_value(v) for v in _metric_values(truth, pred, names)))
    return 0


def _eval_batch(args: argparse.Namespace, names: list[str]) -> int:
    manifest = dataset_mod.load_manifest(args.manifest)
    root = Path(args.manifest).parent
    records = manifest.subset(None if args.split == "all" else args.split)
    if args.algo:
        records = [r for r in records if r.algorithm == args.algo]
    if not records:
        raise DomainError("no manifest records match the requested split/algorithm")
    header = ["id", "algorithm"] + [n if n != "psnr" else "psnr_db" for n in names]
    rows = []
    for rec in records:
        truth = load_image(root / rec.target_image)
        if args.pred_dir:
            pred_path = Path(args.pred_dir) / f"{rec.id}_{rec.algorithm}.png"
        else:
            pred_path = root / rec.input_image
        pred = load_image(pred_path)
        rows.append((rec.id, rec.algorithm, _metric_values(truth, pred, names)))
    means = [float(np.mean([r[2][i] for r in rows])) for i in range(len(names))]
    lines = [",".join(header)]
    lines += [",".join([str(i), algo] + [_format_value(v) for v in vals])
              for i, algo, vals in rows]
    lines.append(",".join(["mean", ""] + [_format_value(v) for v in means]))
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
        log.info("wrote %s (%d pairs)", args.out, len(rows))
    else:
        sys.stdout.write(text)
    return 0


def _cmd_compare(args: argparse.Namespace) -> int:
    manifest = dataset_mod.load_manifest(args.manifest)
    root = Path(args.manifest).parent
    ids = [int(part) for part in args.ids.split(",") if part.strip()]
    if not ids:
        raise ConfigurationError("--ids must name at least one sample")
    manifest_algos = []
    for rec in manifest.records:
        if rec.algorithm not in manifest_algos:
            manifest_algos.append(rec.algorithm)
    algos = ([a.strip() for a in args.algo.split(",") if a.strip()]
             if args.algo else manifest_algos)
    for a in algos:
        if a not in manifest_algos:
            raise DomainError(f"algorithm {a!r} does not appear in the manifest")
    if args.enhanced and len(algos) != 1:
        raise ConfigurationError(
            "--enhanced rows need exactly one algorithm; pass --algo"
        )
    by_key = {(rec.id, rec.algorithm): rec for rec in manifest.records}

    def tile(path: Path) -> np.ndarray:
        img = load_image(path)
        if img.shape != (recon_mod.IMAGE_SIZE, recon_mod.IMAGE_SIZE):
            raise DomainError(f"{path} is {img.shape}, expected a 256 x 256 tile")
        return img

    grid_rows = []
    truth_row = []
    for i in ids:
        rec = next((r for r in manifest.records if r.id == i), None)
        if rec is None:
            raise DomainError(f"sample id {i} is not in the manifest")
        truth_row.append(tile(root / rec.target_image))
    grid_rows.append(truth_row)
    for algo in algos:
        row = []
        for i in ids:
            rec = by_key.get((i, algo))
            if rec is None:
                raise DomainError(f"sample {i} has no {algo} reconstruction")
            row.append(tile(root / rec.input_image))
        grid_rows.append(row)
    for directory in args.enhanced:
        row = [tile(Path(directory) / f"{i}_{algos[0]}.png") for i in ids]
        grid_rows.append(row)

    grid = np.vstack([np.hstack(row) for row in grid_rows])
    save_image(args.out, grid)
    log.info("wrote %s: %d rows x %d columns", args.out, len(grid_rows), len(ids))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    quiet = getattr(args, "quiet", False)
    seed = getattr(args, "seed", 0)
    threads = _resolve_threads(getattr(args, "threads", 1))
    logging.basicConfig(stream=sys.stderr, format="%(message)s",
                        level=logging.WARNING if quiet else logging.INFO)
    try:
        if args.command == "mesh":
            return _cmd_mesh(args)
        if args.command == "phantom":
            return _cmd_phantom(args, seed)
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "sensitivity":
            return _cmd_sensitivity(args)
        if args.command == "reconstruct":
            return _cmd_reconstruct(args)
        if args.command == "dataset":
            return _cmd_dataset_gen(args, seed, threads)
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "compare":
            return _cmd_compare(args)
        raise ConfigurationError(f"unhandled command {args.command!r}")
    except (TomoError, OSError) as err:
        print(f"tomo {args.command}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
