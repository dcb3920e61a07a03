"""Command-line entry: train on a manifest, or re-evaluate a checkpoint."""

from __future__ import annotations

import argparse
import logging
import sys

from . import __version__
from .data import DataError
from .spec import CnnSpec
from .train import evaluate, train

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_IO = 4


def _parse_channels(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad channel list {text!r}") from None


def _spec_from_args(args) -> CnnSpec:
    return CnnSpec(
        blocks=args.blocks,
        channels=args.channels or (),
        kernel_size=args.kernel,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.lr,
        seed=args.seed,
        patience=args.patience,
        pool=args.pool,
        deterministic=not args.non_deterministic,
    )


def cmd_train(args) -> int:
    spec = _spec_from_args(args)
    result = train(args.manifest, spec, out_dir=args.out_dir)
    r = result.report
    auc = "n/a" if r["roc_auc_ovr_macro"] is None else f"{r['roc_auc_ovr_macro']:.4f}"
    print(
        f"best epoch {result.best_epoch}: accuracy={r['accuracy']:.4f} "
        f"f1_macro={r['f1_macro']:.4f} auc={auc} "
        f"({r['train_runtime_sec']:.1f}s) -> {args.out_dir}"
    )
    return EXIT_OK


def cmd_evaluate(args) -> int:
    result = evaluate(args.checkpoint, args.manifest, out_dir=args.out_dir)
    r = result.report
    print(f"accuracy={r['accuracy']:.4f} f1_macro={r['f1_macro']:.4f} "
          f"-> {args.out_dir}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cnn-trainer",
        description="Train block CNNs on a manifest-described image dataset",
    )
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="per-epoch logging")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("train", help="fit a model and score the test split")
    sp.add_argument("manifest", help="manifest.jsonl with train/validation/test splits")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--blocks", type=int, default=3, choices=(1, 3, 4))
    sp.add_argument("--channels", type=_parse_channels, metavar="C1,C2,...",
                    help="channel width per block (default 32,64,128,128 prefix)")
    sp.add_argument("--kernel", type=int, default=3)
    sp.add_argument("--epochs", type=int, default=100)
    sp.add_argument("--batch-size", type=int, default=32)
    sp.add_argument("--lr", type=float, default=1e-3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--patience", type=int, default=10,
                    help="epochs without validation improvement before stopping")
    sp.add_argument("--pool", type=int, default=4,
                    help="mean-pool factor applied to inputs before the net")
    sp.add_argument("--non-deterministic", action="store_true",
                    help="allow nondeterministic kernels (faster, not reproducible)")
    sp.set_defaults(fn=cmd_train)

    sp = sub.add_parser("evaluate", help="score a checkpoint on a manifest")
    sp.add_argument("checkpoint", help="checkpoint.pt from a train run")
    sp.add_argument("manifest")
    sp.add_argument("--out-dir", required=True)
    sp.set_defaults(fn=cmd_evaluate)

    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.fn(args)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
