"""Training loop, evaluation and the k-fold experiment runner.

Training mirrors the reference recipe: SGD with cross-entropy loss,
learning rate 0.001 for the first epoch and a decay of 0.1 every 15 epochs,
mini-batches of 16. Toy-scale overrides go through ``Hyperparams``.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .data import PairedDataset
from .folds import fold_split, make_fold_plan
from .metrics import MetricsReport, compute_metrics
from .models import FusionSpec, build_model


@dataclass(frozen=True)
class Hyperparams:
    epochs: int = 30
    lr: float = 1e-3
    momentum: float = 0.9
    batch_size: int = 16
    lr_decay_every: int = 15
    lr_decay: float = 0.1
    seed: int = 0


@dataclass
class EpochStats:
    epoch: int
    lr: float
    loss: float
    accuracy: float


def _batches(n: int, batch_size: int, generator: torch.Generator):
    order = torch.randperm(n, generator=generator)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def train_fold(
    model: nn.Module, data: PairedDataset, hyper: Hyperparams
) -> tuple[nn.Module, list[EpochStats]]:
    """Train in place on one fold's training data; returns per-epoch history."""
    if len(data) == 0:
        raise ValueError("empty training split")
    optimizer = torch.optim.SGD(model.parameters(), lr=hyper.lr, momentum=hyper.momentum)
    scheduler = torch.optim.lr_scheduler.StepLR(
        optimizer, step_size=hyper.lr_decay_every, gamma=hyper.lr_decay
    )
    loss_fn = nn.CrossEntropyLoss()
    generator = torch.Generator().manual_seed(hyper.seed)
    history: list[EpochStats] = []
    model.train()
    for epoch in range(hyper.epochs):
        total_loss = 0.0
        correct = 0
        for idx in _batches(len(data), hyper.batch_size, generator):
            cxr, mf, labels = data.cxr[idx], data.mf[idx], data.labels[idx]
            optimizer.zero_grad()
            logits = model(cxr, mf)
            loss = loss_fn(logits, labels)
            loss.backward()
            optimizer.step()
            total_loss += float(loss.detach()) * len(idx)
            correct += int((logits.argmax(dim=1) == labels).sum())
        history.append(
            EpochStats(
                epoch=epoch,
                lr=optimizer.param_groups[0]["lr"],
                loss=total_loss / len(data),
                accuracy=correct / len(data),
            )
        )
        scheduler.step()
    return model, history


@torch.no_grad()
def evaluate(model: nn.Module, data: PairedDataset) -> MetricsReport:
    """Deterministic metrics of a trained model on a split."""
    if len(data) == 0:
        raise ValueError("empty evaluation split")
    model.eval()
    logits = model(data.cxr, data.mf)
    preds = logits.argmax(dim=1).numpy()
    return compute_metrics(data.labels.numpy(), preds)


@torch.no_grad()
def training_accuracy(model: nn.Module, data: PairedDataset) -> float:
    model.eval()
    preds = model(data.cxr, data.mf).argmax(dim=1)
    return float((preds == data.labels).float().mean())


def run_experiment(
    dataset: PairedDataset,
    entries,
    spec: FusionSpec,
    hyper: Hyperparams,
    k: int,
    out_dir: str | Path,
    seed: int = 0,
) -> dict:
    """Train and evaluate over all k folds; write metrics.json and history.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan = make_fold_plan(entries, k, seed=seed)

    fold_reports: list[MetricsReport] = []
    history_rows = ["fold,epoch,lr,loss,accuracy"]
    t0 = time.perf_counter()
    for fold in range(k):
        train_subj, _val_subj, test_subj = fold_split(plan, fold)
        model = build_model(spec, seed=seed + fold)
        model, history = train_fold(model, dataset.subset_by_subjects(train_subj), hyper)
        for h in history:
            history_rows.append(f"{fold},{h.epoch},{h.lr:.6g},{h.loss:.6f},{h.accuracy:.4f}")
        fold_reports.append(evaluate(model, dataset.subset_by_subjects(test_subj)))

    accuracies = np.array([r.accuracy for r in fold_reports])
    summary = {
        "mode": spec.mode,
        "k": k,
        "seconds": round(time.perf_counter() - t0, 2),
        "folds": [r.to_dict() for r in fold_reports],
        "mean_accuracy": float(accuracies.mean()),
        "std_accuracy": float(accuracies.std()),
    }
    (out_dir / "metrics.json").write_text(json.dumps(summary, indent=2) + "\n")
    (out_dir / "history.csv").write_text("\n".join(history_rows) + "\n")
    return summary
