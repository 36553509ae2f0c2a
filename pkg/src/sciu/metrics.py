"""Classification metrics (WAR/UAR, confusion matrix) and oracle-side
purification quality.

WAR is recall weighted by class support, i.e. overall accuracy. UAR is the
unweighted mean of per-class recalls; classes with no true samples are
excluded and reported rather than counted as zero.

`pruning_quality` and `correction_quality` are the only consumers of the
dataset's oracle fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .dataset import CorrectionEvent, Dataset, QUALITY_LOW
from .errors import EvaluationError


@dataclass
class ConfusionMatrix:
    n_classes: int
    counts: np.ndarray

    @classmethod
    def from_predictions(
        cls, true: Sequence[int], pred: Sequence[int], n_classes: int
    ) -> "ConfusionMatrix":
        counts = np.zeros((n_classes, n_classes), dtype=np.int64)
        for t, p in zip(true, pred):
            counts[t, p] += 1
        return cls(n_classes, counts)

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def war(cm: ConfusionMatrix) -> float:
    """Support-weighted recall = trace / total = overall accuracy."""
    if cm.total == 0:
        raise EvaluationError("WAR undefined on an empty confusion matrix")
    return float(np.trace(cm.counts)) / cm.total


def uar(cm: ConfusionMatrix) -> float:
    value, _ = uar_with_exclusions(cm)
    return value


def uar_with_exclusions(cm: ConfusionMatrix) -> tuple[float, list[int]]:
    """Mean per-class recall plus the list of classes excluded for having
    no true samples."""
    row_totals = cm.counts.sum(axis=1)
    present = row_totals > 0
    if not present.any():
        raise EvaluationError("UAR undefined: no class has any true sample")
    recalls = np.diag(cm.counts)[present] / row_totals[present]
    excluded = [int(c) for c in np.flatnonzero(~present)]
    return float(recalls.mean()), excluded


def pruning_quality(
    pruned_ids: Iterable[int], dataset: Dataset
) -> dict[str, Optional[float]]:
    """Precision/recall of the pruned set against the low-quality oracle flag.

    Precision is None when nothing was pruned.
    """
    flags = dataset.oracle_quality_flags()
    if any(v is None for v in flags.values()):
        raise EvaluationError("pruning_quality requires oracle quality flags")
    pruned = set(pruned_ids)
    low = {i for i, f in flags.items() if f == QUALITY_LOW}
    hit = len(pruned & low)
    precision = hit / len(pruned) if pruned else None
    recall = hit / len(low) if low else None
    return {"precision": precision, "recall": recall}


def correction_quality(
    events: Sequence[CorrectionEvent], dataset: Dataset
) -> dict[str, Optional[float]]:
    """correction_accuracy = fraction of events landing on the true label;
    harmful_rate = fraction that broke an already-correct label.

    Both None when there are no events.
    """
    truth = dataset.oracle_true_labels()
    if any(v is None for v in truth.values()):
        raise EvaluationError("correction_quality requires oracle true labels")
    if not events:
        return {"correction_accuracy": None, "harmful_rate": None}
    good = sum(1 for e in events if e.new_label == truth[e.sample_id])
    harmful = sum(
        1
        for e in events
        if e.old_label == truth[e.sample_id] and e.new_label != truth[e.sample_id]
    )
    n = len(events)
    return {"correction_accuracy": good / n, "harmful_rate": harmful / n}
