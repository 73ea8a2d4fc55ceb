"""Command-line front end for the enhancer.

Two subcommands: ``train`` fits the adversarial pair on a corpus
manifest and writes checkpoints plus ``curve.csv``; ``enhance`` runs
a saved generator over a directory of reconstruction images. Progress
goes to the error stream, silenced by ``--quiet``. Exit codes: 0 on
success, 2 on usage errors, 1 on runtime failures (the message names
the failing subcommand).
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import GanConfig
from .enhance import enhance
from .errors import GanError
from .train import train

log = logging.getLogger(__name__)


def _checkpoint_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated epochs, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("checkpoint list must not be empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tomo-gan",
        description="Train and apply the reconstruction-enhancement network.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("train", help="fit the enhancer on a paired corpus")
    p.add_argument("--manifest", required=True, metavar="MANIFEST.jsonl")
    p.add_argument("--out", required=True, metavar="RUN_DIR",
                   help="directory for checkpoints and curve.csv")
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--checkpoints", type=_checkpoint_list, default=None, metavar="E1,E2,...",
                   help="epochs to snapshot (default: 25,50,100,200 clipped to --epochs)")
    p.add_argument("--l1-weight", type=float, default=100.0,
                   help="weight of the picture-space fidelity term (default 100)")
    p.add_argument("--batch-size", type=int, default=1)
    p.add_argument("--lr", type=float, default=2e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--algo", metavar="NAME",
                   help="train on one reconstruction algorithm only (default: all)")
    p.add_argument("--device", default="cpu")
    p.add_argument("--quiet", action="store_true", help="silence progress diagnostics")

    p = sub.add_parser("enhance", help="apply a trained generator to images")
    p.add_argument("--checkpoint", required=True, metavar="RUN_DIR/epochN")
    p.add_argument("--inputs", required=True, metavar="DIR",
                   help="directory of grayscale PNGs to enhance")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--quiet", action="store_true", help="silence progress diagnostics")

    return parser


def _cmd_train(args: argparse.Namespace) -> int:
    config = GanConfig(
        l1_weight=args.l1_weight,
        epochs=args.epochs,
        checkpoint_epochs=args.checkpoints,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
    )
    history = train(args.manifest, config, args.out,
                    algorithm=args.algo, device=args.device)
    final = history[-1]
    log.info("done: %d epochs, final g=%.4f val_rmse=%.4f",
             final.epoch, final.g_loss, final.val_rmse)
    return 0


def _cmd_enhance(args: argparse.Namespace) -> int:
    written = enhance(args.checkpoint, args.inputs, args.out)
    log.info("wrote %d images", len(written))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(message)s",
                        level=logging.WARNING if args.quiet else logging.INFO)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "enhance":
            return _cmd_enhance(args)
        raise GanError(f"unhandled command {args.command!r}")
    except (GanError, OSError) as err:
        print(f"tomo-gan {args.command}: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
