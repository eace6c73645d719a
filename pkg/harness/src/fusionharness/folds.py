"""Subject-disjoint, class-stratified k-fold planning."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .metrics import LABELS


class FoldError(ValueError):
    pass


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of every subject to exactly one fold.

    Because train/val/test splits are unions of whole folds, no subject can
    appear on both sides of any split boundary.
    """

    k: int
    assignments: dict

    def subjects_in_fold(self, fold: int) -> list[str]:
        return sorted(s for s, f in self.assignments.items() if f == fold)


def make_fold_plan(entries, k: int, seed: int = 0) -> FoldPlan:
    """Partition subjects into k folds, stratified by class.

    ``entries`` is any iterable of objects with ``label`` and ``subject``
    attributes (a manifest). A subject carrying two different labels is a
    labeling conflict; fewer than k subjects in any class is unsplittable.
    """
    if k < 2:
        raise FoldError(f"need at least 2 folds, got {k}")
    subject_label: dict[str, str] = {}
    for e in entries:
        seen = subject_label.get(e.subject)
        if seen is not None and seen != e.label:
            raise FoldError(
                f"labeling conflict: subject {e.subject!r} appears as both {seen!r} and {e.label!r}"
            )
        subject_label[e.subject] = e.label

    rng = np.random.default_rng(seed)
    assignments: dict[str, int] = {}
    for label in LABELS:
        subjects = sorted(s for s, lab in subject_label.items() if lab == label)
        if not subjects:
            continue
        if len(subjects) < k:
            raise FoldError(f"class {label!r} has {len(subjects)} subjects, need >= {k}")
        order = rng.permutation(len(subjects))
        for pos, idx in enumerate(order):
            assignments[subjects[idx]] = pos % k
    return FoldPlan(k=k, assignments=assignments)


def fold_split(plan: FoldPlan, fold: int) -> tuple[set, set, set]:
    """(train, val, test) subject sets for one fold rotation."""
    if not 0 <= fold < plan.k:
        raise FoldError(f"fold {fold} out of range for k={plan.k}")
    test = set(plan.subjects_in_fold(fold))
    val = set(plan.subjects_in_fold((fold + 1) % plan.k))
    train = {s for s, f in plan.assignments.items() if f not in (fold, (fold + 1) % plan.k)}
    return train, val, test
