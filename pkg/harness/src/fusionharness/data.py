"""Dataset plumbing: manifests, paired image loading and the synthetic toy set.

The harness consumes the enhancement tool's external surfaces only: a
`path,label,subject` manifest CSV and a batch output directory laid out as
``<dir>/<feature>/<stem>.png`` (the ``mf`` feature is the 3-channel input of
the second stream). Network inputs are per-channel min-max normalized to
[0, 1].
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .metrics import LABELS

LABEL_INDEX = {label: i for i, label in enumerate(LABELS)}


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    subject: str


def read_manifest(path: str | Path) -> list[ManifestEntry]:
    path = Path(path)
    entries = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header] != ["path", "label", "subject"]:
            raise DataError(f"expected header 'path,label,subject' in {path}")
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DataError(f"{path}: row {row_no} has {len(row)} fields")
            p, label, subject = (c.strip() for c in row)
            if label not in LABEL_INDEX:
                raise DataError(f"{path}: row {row_no} unknown label {label!r}")
            entries.append(ManifestEntry(p, label, subject))
    return entries


def _minmax(chan: np.ndarray) -> np.ndarray:
    lo, hi = chan.min(), chan.max()
    return (chan - lo) / (hi - lo) if hi > lo else np.zeros_like(chan)


def _load_planes(path: Path, channels: int) -> np.ndarray:
    with Image.open(path) as im:
        arr = np.asarray(im).astype(np.float32)
    if channels == 1:
        if arr.ndim == 3:
            arr = arr.mean(axis=2)
        arr = arr[None, :, :]
    else:
        if arr.ndim != 3 or arr.shape[2] < channels:
            raise DataError(f"{path}: expected {channels}-channel image, got {arr.shape}")
        arr = arr[:, :, :channels].transpose(2, 0, 1)
    return np.stack([_minmax(c) for c in arr])


@dataclass
class PairedDataset:
    """Original + multi-feature tensors with labels and subject ids."""

    cxr: torch.Tensor  # (N, 1, H, W)
    mf: torch.Tensor  # (N, 3, H, W)
    labels: torch.Tensor  # (N,)
    subjects: list

    def __len__(self) -> int:
        return self.cxr.shape[0]

    def subset_by_subjects(self, subjects: set) -> "PairedDataset":
        idx = [i for i, s in enumerate(self.subjects) if s in subjects]
        return PairedDataset(
            cxr=self.cxr[idx],
            mf=self.mf[idx],
            labels=self.labels[idx],
            subjects=[self.subjects[i] for i in idx],
        )


def load_paired_dataset(manifest_path: str | Path, mf_dir: str | Path) -> PairedDataset:
    """Pair each manifest image with its enhanced counterpart in ``mf_dir``."""
    entries = read_manifest(manifest_path)
    if not entries:
        raise DataError(f"empty manifest: {manifest_path}")
    mf_dir = Path(mf_dir)
    cxr_list, mf_list, labels, subjects = [], [], [], []
    for e in entries:
        mf_path = mf_dir / f"{Path(e.path).stem}.png"
        if not mf_path.exists():
            raise DataError(f"missing multi-feature image for {e.path}: {mf_path}")
        cxr_list.append(_load_planes(Path(e.path), 1))
        mf_list.append(_load_planes(mf_path, 3))
        labels.append(LABEL_INDEX[e.label])
        subjects.append(e.subject)
    return PairedDataset(
        cxr=torch.from_numpy(np.stack(cxr_list)),
        mf=torch.from_numpy(np.stack(mf_list)),
        labels=torch.tensor(labels, dtype=torch.long),
        subjects=subjects,
    )


# --- synthetic toy set ------------------------------------------------------

TOY_CYCLES = {"normal": 4.0, "pneumonia": 8.0, "covid19": 16.0}


def make_toy_dataset(
    root: str | Path,
    subjects_per_class: int = 10,
    images_per_subject: int = 2,
    size: int = 64,
    seed: int = 0,
) -> Path:
    """Write a 3-class texture dataset and its manifest; returns the manifest path.

    Each class is an oriented sinusoidal grating at a class-specific spatial
    frequency; orientation and phase vary per subject, plus mild grain. The
    default 10 subjects x 2 images x 3 classes gives the 60-image smoke set.
    """
    root = Path(root)
    img_dir = root / "images"
    img_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    coords = np.arange(size) / size
    yy, xx = np.meshgrid(coords, coords, indexing="ij")
    rows = ["path,label,subject"]
    for label, cycles in TOY_CYCLES.items():
        for s in range(subjects_per_class):
            subject = f"{label[:3]}{s:02d}"
            theta = rng.uniform(0, np.pi)
            for i in range(images_per_subject):
                phase = rng.uniform(0, 2 * np.pi)
                axis = np.cos(theta) * xx + np.sin(theta) * yy
                img = 0.5 + 0.35 * np.sin(2 * np.pi * cycles * axis + phase)
                img += rng.normal(0.0, 0.02, (size, size))
                img = np.clip(img, 0.0, 1.0)
                path = img_dir / f"{subject}_{i}.png"
                Image.fromarray(np.rint(img * 255).astype(np.uint8)).save(path)
                rows.append(f"{path},{label},{subject}")
    manifest = root / "manifest.csv"
    manifest.write_text("\n".join(rows) + "\n")
    return manifest
