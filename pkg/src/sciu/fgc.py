"""Fine-grained correction: relabel samples whose predictions are stable on
two axes over a trailing window.

Axis 1: the predicted label is identical across the last t epochs.
Axis 2: mean predicted-label probability exceeds mean annotated-label
probability by strictly more than tau.

Accepted samples take the stable predicted label; their history is cleared
so at least t further epochs must pass before they can be corrected again.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .dataset import CorrectionEvent, Dataset
from .errors import ConfigurationError, LogicError


@dataclass
class PredictionHistory:
    sample_id: int
    window: int
    entries: deque = field(default_factory=deque)  # (y_pred, p_pred, p_gt)
    epochs_recorded: int = 0

    def record(self, y_pred: int, p_pred: float, p_gt: float) -> None:
        self.entries.append((y_pred, p_pred, p_gt))
        if len(self.entries) > self.window:
            self.entries.popleft()
        self.epochs_recorded += 1

    def clear(self) -> None:
        self.entries.clear()
        self.epochs_recorded = 0


def label_stable(history: PredictionHistory) -> bool:
    """True iff a full window is present and every buffered prediction agrees."""
    if history.epochs_recorded < history.window:
        return False
    labels = {e[0] for e in history.entries}
    return len(labels) == 1


def score_gap(history: PredictionHistory) -> float:
    """mean(p_pred) - mean(p_gt) over the window."""
    if history.epochs_recorded < history.window:
        raise LogicError(
            f"sample {history.sample_id}: score_gap requires a full window"
        )
    mean_pred = sum(e[1] for e in history.entries) / len(history.entries)
    mean_gt = sum(e[2] for e in history.entries) / len(history.entries)
    return mean_pred - mean_gt


def correction_decision(history: PredictionHistory, tau: float) -> bool:
    """Accept iff the label is stable AND the score gap strictly exceeds tau."""
    if not label_stable(history):
        return False
    return score_gap(history) > tau


@dataclass
class CorrectionState:
    tau: float
    window: int
    histories: dict[int, PredictionHistory] = field(default_factory=dict)
    corrections: list[CorrectionEvent] = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ConfigurationError("tau must be in (0, 1)")
        if self.window < 1:
            raise ConfigurationError("window must be >= 1")


def record_prediction(
    state: CorrectionState,
    sample_id: int,
    probs: np.ndarray,
    gt_label: int,
    epoch: int,
) -> None:
    """Store argmax label (ties -> lowest index), its probability, and the
    probability of the current annotated label."""
    probs = np.asarray(probs, dtype=np.float64)
    y_pred = int(np.argmax(probs))
    hist = state.histories.get(sample_id)
    if hist is None:
        hist = state.histories[sample_id] = PredictionHistory(sample_id, state.window)
    hist.record(y_pred, float(probs[y_pred]), float(probs[gt_label]))


def apply_corrections(
    state: CorrectionState, dataset: Dataset, epoch: int
) -> tuple[Dataset, list[CorrectionEvent]]:
    """Relabel every accepted sample with its stable prediction.

    Returns (D4 with the same sample ids, events for this call). Each
    corrected sample's history is cleared.
    """
    new_labels: dict[int, int] = {}
    events: list[CorrectionEvent] = []
    for s in dataset.samples:
        hist = state.histories.get(s.id)
        if hist is None:
            continue
        if correction_decision(hist, state.tau):
            new_label = hist.entries[0][0]
            events.append(CorrectionEvent(s.id, s.label, new_label, epoch))
            new_labels[s.id] = new_label
            hist.clear()
    state.corrections.extend(events)
    d4 = dataset.with_labels(new_labels) if new_labels else dataset
    return d4, events
