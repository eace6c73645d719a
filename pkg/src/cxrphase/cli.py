"""Batch command-line interface.

Two subcommands: ``enhance`` for a single image and ``batch`` for a manifest
CSV. Exit codes: 0 success, 1 (partial) failure, 2 invalid invocation or
configuration. Log verbosity comes from the CXRPHASE_LOG environment
variable (debug/info/warning/error).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .image_io import ImageIOError, ManifestError, load_image, read_manifest, save_image
from .pipeline import (
    BankCache,
    ConfigError,
    EnhanceConfig,
    RunRecord,
    enhance_image,
    feature_planes,
    parse_config,
    run_batch,
)

log = logging.getLogger("cxrphase")


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", metavar="FILE", help="TOML configuration file")
    parser.add_argument("--working-size", type=int, dest="working_size", metavar="N",
                        help="square working resolution (0 = native)")
    parser.add_argument("--guard", type=float, help="relative division guard for lwpa")
    parser.add_argument("--bit-depth", type=int, dest="output_bit_depth", choices=(8, 16),
                        help="output bit depth for scalar feature maps")
    parser.add_argument("--emit", metavar="LIST",
                        help="comma-separated features to write (lwpa,lpe,elea,mf)")
    parser.add_argument("--alpha", type=float, help="bandpass scale-space exponent")
    parser.add_argument("--s0", type=float, help="finest bandpass scale")
    parser.add_argument("--scale-multiplier", type=float, dest="scale_multiplier",
                        help="ratio between successive bandpass scales")
    parser.add_argument("--scales", type=int, help="number of bandpass scales")
    parser.add_argument("--lambda", type=float, dest="lam", help="data-fidelity weight")
    parser.add_argument("--epsilon", type=float, help="transmission division guard")
    parser.add_argument("--delta", type=float, help="attenuation exponent")
    parser.add_argument("--rho", type=float,
                        help="fixed echogenicity constant (default: per-image lpe mean)")
    parser.add_argument("--trace", action="store_const", const=True, default=None,
                        dest="debug_trace", help="export per-iteration solver objectives as JSON")


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides = {
        "working_size": args.working_size,
        "guard": args.guard,
        "output_bit_depth": args.output_bit_depth,
        "assd.alpha": args.alpha,
        "assd.s0": args.s0,
        "assd.scale_multiplier": args.scale_multiplier,
        "assd.num_scales": args.scales,
        "elea.lambda": args.lam,
        "elea.epsilon": args.epsilon,
        "elea.delta": args.delta,
        "debug_trace": args.debug_trace,
    }
    if args.emit is not None:
        overrides["emit"] = [f.strip() for f in args.emit.split(",") if f.strip()]
    if args.rho is not None:
        overrides["elea.rho_mode"] = "fixed"
        overrides["elea.rho_value"] = args.rho
    return overrides


def _resolve_config(args: argparse.Namespace) -> EnhanceConfig:
    return parse_config(args.config, _overrides_from_args(args))


def _cmd_enhance(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    out_dir = Path(args.out)
    try:
        img = load_image(args.input)
    except ImageIOError as exc:
        log.error("%s", exc)
        return 1
    stats: dict = {}
    features = enhance_image(img, config, BankCache(), stats)
    stem = Path(args.input).stem
    planes = feature_planes(features)
    outputs = {}
    for name in config.emit_features:
        (out_dir / name).mkdir(parents=True, exist_ok=True)
        depth = 8 if name == "mf" else config.output_bit_depth
        save_image(planes[name], out_dir / name / f"{stem}.png", depth)
        outputs[name] = str(out_dir / name / f"{stem}.png")
    if config.debug_trace:
        (out_dir / "trace").mkdir(parents=True, exist_ok=True)
        trace_path = out_dir / "trace" / f"{stem}.json"
        trace_path.write_text(json.dumps({"objective": stats.pop("objective_trace")}))
        outputs["trace"] = str(trace_path)
    record = RunRecord(
        input=str(args.input),
        config_digest=config.digest(),
        stage_seconds={k: round(v, 6) for k, v in stats.items() if k.endswith("_s")},
        outputs=outputs,
        solver_iterations=stats.get("solver_iterations", 0),
        solver_final_objective=stats.get("objective_final", 0.0),
    )
    print(record.to_json())
    return 0


def _cmd_batch(args: argparse.Namespace) -> int:
    config = _resolve_config(args)
    try:
        manifest = read_manifest(args.manifest)
    except ManifestError as exc:
        log.error("%s", exc)
        return 2
    records = run_batch(manifest, config, args.out, parallelism=args.parallelism)
    failures = [r for r in records if r.status != "ok"]
    print(f"{len(records) - len(failures)} ok, {len(failures)} failed -> {args.out}/runs.jsonl")
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cxrphase",
        description="Local-phase enhancement of grayscale radiographs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_enh = sub.add_parser("enhance", help="enhance a single image")
    p_enh.add_argument("input", help="input PNG/PGM image")
    p_enh.add_argument("--out", default="enhanced", help="output directory")
    _add_config_flags(p_enh)
    p_enh.set_defaults(func=_cmd_enhance)

    p_bat = sub.add_parser("batch", help="enhance every image in a manifest CSV")
    p_bat.add_argument("manifest", help="CSV manifest with header path,label,subject")
    p_bat.add_argument("--out", required=True, help="output directory")
    p_bat.add_argument("--parallelism", type=int, default=1, metavar="N",
                       help="concurrent image pipelines")
    _add_config_flags(p_bat)
    p_bat.set_defaults(func=_cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("CXRPHASE_LOG", "warning").upper(), logging.WARNING),
        format="%(levelname)s %(name)s: %(message)s",
    )
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
