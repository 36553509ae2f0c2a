"""Coarse-grained pruning: per-sample trailing windows of weighted scores
and a strict-threshold keep/prune decision.

Each active sample records s = weight * prob once per post-warm-up epoch.
Once a sample has a full window of t scores, its trailing mean S_T is
compared against lambda: keep iff S_T > lambda. Pruning is permanent for
the remainder of the stage.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .dataset import Dataset
from .errors import ConfigurationError, LogicError, ValidationError


@dataclass
class ScoreHistory:
    sample_id: int
    window: int
    scores: deque = field(default_factory=deque)
    epochs_recorded: int = 0

    def record(self, score: float) -> None:
        if not (0.0 <= score <= 1.0):
            raise ValidationError(
                f"sample {self.sample_id}: score {score} outside [0, 1]"
            )
        self.scores.append(score)
        if len(self.scores) > self.window:
            self.scores.popleft()
        self.epochs_recorded += 1


def trailing_mean(history: ScoreHistory) -> float | None:
    """Mean of the buffered scores, or None before a full window."""
    if history.epochs_recorded < history.window:
        return None
    return sum(history.scores) / len(history.scores)


def prune_decision(s_t: float, lam: float) -> bool:
    """True = keep. Keep iff S_T > lambda (strict); equality prunes."""
    return s_t > lam


@dataclass
class PruneState:
    lam: float
    window: int
    warmup_epochs: int
    histories: dict[int, ScoreHistory] = field(default_factory=dict)
    pruned_ids: set[int] = field(default_factory=set)
    prune_log: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if not (0.0 < self.lam < 1.0):
            raise ConfigurationError("lambda must be in (0, 1)")
        if self.window < 1:
            raise ConfigurationError("window must be >= 1")


def record_score(
    state: PruneState, sample_id: int, weight: float, prob_of_label: float, epoch: int
) -> None:
    if sample_id in state.pruned_ids:
        raise LogicError(f"sample {sample_id} is pruned, cannot record a score")
    if not (0.0 < weight < 1.0):
        raise ValidationError(f"weight {weight} outside (0, 1)")
    if not (0.0 <= prob_of_label <= 1.0):
        raise ValidationError(f"prob {prob_of_label} outside [0, 1]")
    hist = state.histories.get(sample_id)
    if hist is None:
        hist = state.histories[sample_id] = ScoreHistory(sample_id, state.window)
    hist.record(weight * prob_of_label)


def apply_pruning(
    state: PruneState, dataset: Dataset, epoch: int
) -> tuple[Dataset, set[int]]:
    """Evaluate ready trailing means; move failing samples to pruned_ids.

    Returns (D3 = active remainder, ids newly pruned this call). No-op for
    epochs inside the warm-up phase.
    """
    newly_pruned: set[int] = set()
    if epoch >= state.warmup_epochs:
        for s in dataset.samples:
            if s.id in state.pruned_ids:
                continue
            hist = state.histories.get(s.id)
            if hist is None:
                continue
            s_t = trailing_mean(hist)
            if s_t is None:
                continue
            if not prune_decision(s_t, state.lam):
                newly_pruned.add(s.id)
                state.prune_log.append(
                    {"epoch": epoch, "sample_id": s.id, "S_T": s_t, "lambda": state.lam}
                )
        state.pruned_ids |= newly_pruned
    d3 = dataset.subset(i for i in dataset.ids if i not in state.pruned_ids)
    return d3, newly_pruned
