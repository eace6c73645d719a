"""Dual-stream classifiers with concatenation fusion.

Four modes share one small convolutional encoder design (a stack of
conv-norm-relu-pool blocks): single-stream baselines on either input
(``mono_cxr``, ``mono_mf``), ``mid_fusion`` concatenating the two streams'
feature maps at the midpoint block, and ``late_fusion`` concatenating their
pooled feature vectors ahead of the classifier head. Concatenation means the
channel (or vector) width after fusion is the sum of the stream widths.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
from torch import nn

MODES = ("mono_cxr", "mono_mf", "mid_fusion", "late_fusion")


@dataclass(frozen=True)
class FusionSpec:
    """Architecture selector: mode, encoder widths, class count."""

    mode: str = "late_fusion"
    widths: tuple[int, ...] = (16, 32, 64, 64)
    num_classes: int = 3

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if len(self.widths) < 2 or any(w < 1 for w in self.widths):
            raise ValueError(f"need >= 2 positive block widths, got {self.widths}")
        if self.num_classes < 2:
            raise ValueError(f"need >= 2 classes, got {self.num_classes}")

    @property
    def midpoint(self) -> int:
        return len(self.widths) // 2


def _block(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel_size=3, padding=1, bias=False),
        nn.BatchNorm2d(out_ch),
        nn.ReLU(inplace=True),
        nn.MaxPool2d(2),
    )


def _blocks(in_ch: int, widths) -> nn.Sequential:
    layers = []
    for w in widths:
        layers.append(_block(in_ch, w))
        in_ch = w
    return nn.Sequential(*layers)


class MonoNet(nn.Module):
    """Single-stream encoder + pooled linear head on one of the two inputs."""

    def __init__(self, spec: FusionSpec, in_channels: int, source: str):
        super().__init__()
        self.source = source
        self.encoder = _blocks(in_channels, spec.widths)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.head = nn.Linear(spec.widths[-1], spec.num_classes)

    def forward(self, cxr: torch.Tensor, mf: torch.Tensor | None = None) -> torch.Tensor:
        x = self.encoder(cxr if self.source == "cxr" else mf)
        return self.head(self.pool(x).flatten(1))


class MidFusionNet(nn.Module):
    """Streams up to the midpoint block, channel concatenation, shared tail."""

    def __init__(self, spec: FusionSpec):
        super().__init__()
        mid = spec.midpoint
        self.cxr_stream = _blocks(1, spec.widths[:mid])
        self.mf_stream = _blocks(3, spec.widths[:mid])
        self.fused_channels = 2 * spec.widths[mid - 1]
        self.tail = _blocks(self.fused_channels, spec.widths[mid:])
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.head = nn.Linear(spec.widths[-1], spec.num_classes)

    def forward(self, cxr: torch.Tensor, mf: torch.Tensor) -> torch.Tensor:
        fused = torch.cat([self.cxr_stream(cxr), self.mf_stream(mf)], dim=1)
        return self.head(self.pool(self.tail(fused)).flatten(1))


class LateFusionNet(nn.Module):
    """Full streams, vector concatenation after global pooling."""

    def __init__(self, spec: FusionSpec):
        super().__init__()
        self.cxr_stream = _blocks(1, spec.widths)
        self.mf_stream = _blocks(3, spec.widths)
        self.pool = nn.AdaptiveAvgPool2d(1)
        self.fused_width = 2 * spec.widths[-1]
        self.head = nn.Linear(self.fused_width, spec.num_classes)

    def forward(self, cxr: torch.Tensor, mf: torch.Tensor) -> torch.Tensor:
        a = self.pool(self.cxr_stream(cxr)).flatten(1)
        b = self.pool(self.mf_stream(mf)).flatten(1)
        return self.head(torch.cat([a, b], dim=1))


def build_model(spec: FusionSpec, seed: int = 0) -> nn.Module:
    """Instantiate the model for a spec with deterministic initialization."""
    torch.manual_seed(seed)
    if spec.mode == "mono_cxr":
        return MonoNet(spec, in_channels=1, source="cxr")
    if spec.mode == "mono_mf":
        return MonoNet(spec, in_channels=3, source="mf")
    if spec.mode == "mid_fusion":
        return MidFusionNet(spec)
    return LateFusionNet(spec)
