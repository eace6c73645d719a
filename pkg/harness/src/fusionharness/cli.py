"""Command-line entry points: toy-set generation and k-fold experiments."""

from __future__ import annotations

import argparse
import sys

from .data import load_paired_dataset, make_toy_dataset, read_manifest
from .models import MODES, FusionSpec
from .train import Hyperparams, run_experiment


def _cmd_make_toy(args: argparse.Namespace) -> int:
    manifest = make_toy_dataset(args.out, seed=args.seed, size=args.size)
    print(manifest)
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    dataset = load_paired_dataset(args.manifest, args.mf_dir)
    entries = read_manifest(args.manifest)
    spec = FusionSpec(mode=args.mode)
    hyper = Hyperparams(epochs=args.epochs, lr=args.lr, seed=args.seed)
    summary = run_experiment(
        dataset, entries, spec, hyper, k=args.folds, out_dir=args.out, seed=args.seed
    )
    print(
        f"{spec.mode}: mean accuracy {summary['mean_accuracy']:.3f}"
        f" +/- {summary['std_accuracy']:.3f} over {args.folds} folds -> {args.out}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusionharness",
        description="Toy-scale dual-stream fusion training harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_toy = sub.add_parser("make-toy", help="generate the synthetic 3-class texture set")
    p_toy.add_argument("--out", required=True, help="dataset root directory")
    p_toy.add_argument("--seed", type=int, default=0)
    p_toy.add_argument("--size", type=int, default=64)
    p_toy.set_defaults(func=_cmd_make_toy)

    p_run = sub.add_parser("run", help="k-fold train/evaluate on paired images")
    p_run.add_argument("--manifest", required=True, help="path,label,subject CSV")
    p_run.add_argument("--mf-dir", required=True, dest="mf_dir",
                       help="directory of multi-feature PNGs (the batch tool's mf/ output)")
    p_run.add_argument("--mode", choices=MODES, default="late_fusion")
    p_run.add_argument("--epochs", type=int, default=30)
    p_run.add_argument("--lr", type=float, default=1e-3)
    p_run.add_argument("--folds", type=int, default=5)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--out", required=True, help="output directory for metrics/history")
    p_run.set_defaults(func=_cmd_run)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
