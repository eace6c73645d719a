"""End-to-end enhancement orchestration, configuration and the batch runner.

A single enhancement pass is: resize to the working size, monogenic
responses through the bandpass/Riesz bank (on the mirror-doubled grid),
reduce to lwpa and lpe, estimate the transmission map from the normalized
lpe, recover elea, and compose the three min-max-normalized maps into one
3-channel multi-feature image. Everything is deterministic: identical input
and configuration produce bit-identical outputs, regardless of batch
parallelism.
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .elea import (
    EleaParams,
    build_diff_bank,
    compute_weights,
    recover_elea,
    solve_transmission,
)
from .image_io import Manifest, load_image, normalize_minmax, resize_bilinear, save_image
from .phase_features import (
    PhaseFeatures,
    compute_lpe,
    compute_lwpa,
    compute_monogenic,
    relative_guard,
)
from .spectral import AssdParams, SpectralBank

__all__ = [
    "FEATURES",
    "ConfigError",
    "EnhanceConfig",
    "RunRecord",
    "BankCache",
    "enhance_image",
    "feature_planes",
    "run_batch",
    "parse_config",
]

log = logging.getLogger("cxrphase")

FEATURES = ("lwpa", "lpe", "elea", "mf")


class ConfigError(ValueError):
    """Raised for unknown configuration keys or out-of-range values."""


@dataclass(frozen=True)
class EnhanceConfig:
    """Full parameter set of one enhancement run.

    The defaults are the reference operating point: two bandpass scales,
    lambda = 2, epsilon = 1e-4, delta = 0.85 and a per-image echogenicity
    constant taken from the lpe mean. ``working_size`` of None (0 in TOML)
    enhances at native resolution.
    """

    working_size: int | None = 448
    assd: AssdParams = field(default_factory=AssdParams.from_coarsest_wavelength)
    elea: EleaParams = field(default_factory=EleaParams)
    guard: float = 1e-6
    output_bit_depth: int = 8
    emit_features: tuple[str, ...] = FEATURES
    # diagnostics only (excluded from the digest): per-iteration solver
    # objectives, exported as <out>/trace/<stem>.json
    debug_trace: bool = False

    def __post_init__(self) -> None:
        if self.working_size is not None and self.working_size < 8:
            raise ConfigError(f"working_size must be >= 8 or 0/None, got {self.working_size}")
        if self.guard <= 0.0:
            raise ConfigError(f"guard must be positive, got {self.guard}")
        if self.output_bit_depth not in (8, 16):
            raise ConfigError(f"output_bit_depth must be 8 or 16, got {self.output_bit_depth}")
        bad = [f for f in self.emit_features if f not in FEATURES]
        if bad:
            raise ConfigError(f"unknown feature(s) {bad}; expected subset of {FEATURES}")

    def digest(self) -> str:
        """Deterministic identifier of the full parameter set."""
        blob = json.dumps(
            {
                "working_size": self.working_size,
                "assd": asdict(self.assd),
                "elea": asdict(self.elea),
                "guard": self.guard,
                "output_bit_depth": self.output_bit_depth,
                "emit_features": list(self.emit_features),
            },
            sort_keys=True,
        )
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunRecord:
    """Per-image provenance: timings, outputs and solver summary."""

    input: str
    config_digest: str
    status: str = "ok"
    error: str | None = None
    stage_seconds: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    solver_iterations: int = 0
    solver_final_objective: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


class BankCache:
    """Shape-keyed cache of spectral and difference banks.

    Banks are immutable once built, so the cache is read-shared across
    worker threads after a single-writer warmup per shape.
    """

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._spectral: dict = {}
        self._diff: dict = {}

    def spectral(self, height: int, width: int, params: AssdParams) -> SpectralBank:
        key = (height, width, params)
        with self._lock:
            bank = self._spectral.get(key)
            if bank is None:
                bank = SpectralBank.build(width, height, params)
                self._spectral[key] = bank
            return bank

    def diff(self, shape: tuple[int, int]):
        with self._lock:
            bank = self._diff.get(shape)
            if bank is None:
                bank = build_diff_bank(shape)
                self._diff[shape] = bank
            return bank


def enhance_image(
    img: np.ndarray,
    config: EnhanceConfig,
    cache: BankCache | None = None,
    stats: dict | None = None,
) -> PhaseFeatures:
    """Compute lwpa, lpe, elea and the composed multi-feature image.

    ``stats``, when given, is filled with per-stage wall times and the
    solver summary for provenance records.
    """
    cache = cache or BankCache()
    stats = stats if stats is not None else {}
    img = np.asarray(img, dtype=np.float64)

    t0 = time.perf_counter()
    ws = config.working_size
    if ws is not None and img.shape != (ws, ws):
        img = resize_bilinear(img, ws, ws)
    stats["resize_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    bank = cache.spectral(2 * img.shape[0], 2 * img.shape[1], config.assd)
    responses = compute_monogenic(img, bank)
    stats["monogenic_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    lwpa = compute_lwpa(responses, relative_guard(responses, config.guard))
    lpe = compute_lpe(responses, lwpa)
    lpe_n = normalize_minmax(lpe)
    stats["phase_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    diff_bank = cache.diff(img.shape)
    weights = compute_weights(lpe_n, diff_bank)
    stats["weights_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    tmap = solve_transmission(lpe_n, diff_bank, weights, config.elea, record_trace=config.debug_trace)
    stats["solve_s"] = time.perf_counter() - t0
    stats["solver_iterations"] = tmap.iterations
    stats["objective_init"] = tmap.objective_init
    stats["objective_final"] = tmap.objective_final
    if config.debug_trace:
        stats["objective_trace"] = list(tmap.trace)

    t0 = time.perf_counter()
    elea_img = recover_elea(lpe_n, tmap, config.elea)
    mf = np.stack([normalize_minmax(lwpa), lpe_n, elea_img], axis=-1)
    stats["elea_s"] = time.perf_counter() - t0

    return PhaseFeatures(lwpa=lwpa, lpe=lpe, elea=elea_img, mf=mf)


def feature_planes(features: PhaseFeatures) -> dict:
    return {
        "lwpa": normalize_minmax(features.lwpa),
        "lpe": normalize_minmax(features.lpe),
        "elea": features.elea,
        "mf": features.mf,
    }


def _enhance_entry(
    entry, config: EnhanceConfig, output_dir: Path, cache: BankCache, collision: str | None
) -> RunRecord:
    record = RunRecord(input=entry.path, config_digest=config.digest())
    stats: dict = {}
    try:
        if collision is not None:
            raise FileExistsError(f"output stem collision with {collision}")
        img = load_image(entry.path)
        features = enhance_image(img, config, cache, stats)
        t0 = time.perf_counter()
        stem = Path(entry.path).stem
        planes = feature_planes(features)
        for name in config.emit_features:
            out_path = output_dir / name / f"{stem}.png"
            # 16-bit stays available for the scalar maps; mf is 8-bit RGB.
            depth = 8 if name == "mf" else config.output_bit_depth
            save_image(planes[name], out_path, bit_depth=depth)
            record.outputs[name] = str(out_path)
        if config.debug_trace:
            trace_path = output_dir / "trace" / f"{stem}.json"
            trace_path.write_text(json.dumps({"objective": stats.pop("objective_trace")}))
            record.outputs["trace"] = str(trace_path)
        stats["write_s"] = time.perf_counter() - t0
        record.solver_iterations = stats.pop("solver_iterations", 0)
        stats.pop("objective_init", None)
        record.solver_final_objective = stats.pop("objective_final", 0.0)
        record.stage_seconds = {k: round(v, 6) for k, v in stats.items()}
    except Exception as exc:  # per-entry isolation: one bad file must not abort the batch
        record.status = "error"
        record.error = f"{type(exc).__name__}: {exc}"
        log.warning("failed to enhance %s: %s", entry.path, record.error)
    return record


def run_batch(
    manifest: Manifest,
    config: EnhanceConfig,
    output_dir: str | Path,
    parallelism: int = 1,
) -> list[RunRecord]:
    """Enhance every manifest entry into ``<output_dir>/<feature>/<stem>.png``.

    Failures are recorded per entry and do not abort the batch. Records are
    written to ``runs.jsonl`` in manifest order.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be >= 1, got {parallelism}")
    output_dir = Path(output_dir)
    for name in config.emit_features:
        (output_dir / name).mkdir(parents=True, exist_ok=True)
    if config.debug_trace:
        (output_dir / "trace").mkdir(parents=True, exist_ok=True)

    # distinct manifest paths may still share an output stem; only the first
    # such entry is written, the rest become per-entry failures
    first_with_stem: dict[str, str] = {}
    for e in manifest:
        first_with_stem.setdefault(Path(e.path).stem, e.path)
    collisions = [
        None if first_with_stem[Path(e.path).stem] == e.path else first_with_stem[Path(e.path).stem]
        for e in manifest
    ]

    cache = BankCache()
    jobs = list(zip(manifest, collisions))
    if parallelism == 1 or len(manifest) <= 1:
        records = [_enhance_entry(e, config, output_dir, cache, c) for e, c in jobs]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            records = list(
                pool.map(lambda job: _enhance_entry(job[0], config, output_dir, cache, job[1]), jobs)
            )

    with open(output_dir / "runs.jsonl", "w") as fh:
        for record in records:
            fh.write(record.to_json() + "\n")
    failures = sum(1 for r in records if r.status != "ok")
    log.info("batch complete: %d ok, %d failed", len(records) - failures, failures)
    return records


# --- configuration parsing -------------------------------------------------

_TOP_KEYS = {"working_size", "guard", "output_bit_depth", "emit", "debug_trace"}
_ASSD_KEYS = {"alpha", "s0", "scale_multiplier", "num_scales"}
_ELEA_KEYS = {
    "lambda",
    "epsilon",
    "delta",
    "rho_mode",
    "rho_value",
    "beta0",
    "beta_max",
    "beta_scale",
    "max_outer_iters",
}


def _default_tree() -> dict:
    assd = AssdParams.from_coarsest_wavelength()
    elea = EleaParams()
    return {
        "working_size": 448,
        "guard": 1e-6,
        "output_bit_depth": 8,
        "emit": list(FEATURES),
        "debug_trace": False,
        "assd": {
            "alpha": assd.alpha,
            "s0": assd.s0,
            "scale_multiplier": assd.scale_multiplier,
            "num_scales": assd.num_scales,
        },
        "elea": {
            "lambda": elea.lam,
            "epsilon": elea.epsilon,
            "delta": elea.delta,
            "rho_mode": elea.rho_mode,
            "rho_value": elea.rho_value,
            "beta0": elea.beta0,
            "beta_max": elea.beta_max,
            "beta_scale": elea.beta_scale,
            "max_outer_iters": elea.max_outer_iters,
        },
    }


def _merge_file(tree: dict, path: Path) -> None:
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    for key, value in data.items():
        if key == "assd":
            for k, v in value.items():
                if k not in _ASSD_KEYS:
                    raise ConfigError(f"unknown key 'assd.{k}' in {path}")
                tree["assd"][k] = v
        elif key == "elea":
            for k, v in value.items():
                if k not in _ELEA_KEYS:
                    raise ConfigError(f"unknown key 'elea.{k}' in {path}")
                tree["elea"][k] = v
        elif key in _TOP_KEYS:
            tree[key] = value
        else:
            raise ConfigError(f"unknown key {key!r} in {path}")


def _build_config(tree: dict) -> EnhanceConfig:
    try:
        assd = AssdParams(
            alpha=float(tree["assd"]["alpha"]),
            s0=float(tree["assd"]["s0"]),
            scale_multiplier=float(tree["assd"]["scale_multiplier"]),
            num_scales=int(tree["assd"]["num_scales"]),
        )
        elea = EleaParams(
            lam=float(tree["elea"]["lambda"]),
            epsilon=float(tree["elea"]["epsilon"]),
            delta=float(tree["elea"]["delta"]),
            rho_mode=str(tree["elea"]["rho_mode"]),
            rho_value=float(tree["elea"]["rho_value"]),
            beta0=float(tree["elea"]["beta0"]),
            beta_max=float(tree["elea"]["beta_max"]),
            beta_scale=float(tree["elea"]["beta_scale"]),
            max_outer_iters=int(tree["elea"]["max_outer_iters"]),
        )
        working = int(tree["working_size"])
        return EnhanceConfig(
            working_size=None if working == 0 else working,
            assd=assd,
            elea=elea,
            guard=float(tree["guard"]),
            output_bit_depth=int(tree["output_bit_depth"]),
            emit_features=tuple(tree["emit"]),
            debug_trace=bool(tree["debug_trace"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> EnhanceConfig:
    """Resolve a configuration: flags override file values override defaults.

    ``overrides`` maps dotted keys ("elea.lambda", "assd.num_scales",
    "working_size", ...) to values, mirroring the command-line flags.
    """
    tree = _default_tree()
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        _merge_file(tree, p)
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        parts = dotted.split(".")
        if len(parts) == 1:
            if parts[0] not in _TOP_KEYS:
                raise ConfigError(f"unknown override key {dotted!r}")
            tree[parts[0]] = value
        elif len(parts) == 2 and parts[0] == "assd" and parts[1] in _ASSD_KEYS:
            tree["assd"][parts[1]] = value
        elif len(parts) == 2 and parts[0] == "elea" and parts[1] in _ELEA_KEYS:
            tree["elea"][parts[1]] = value
        else:
            raise ConfigError(f"unknown override key {dotted!r}")
    return _build_config(tree)
