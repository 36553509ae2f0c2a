"""Epoch-driven training loop binding the model, the optimizer, and the
pruning/correction state machines.

Per epoch: deterministic shuffle keyed by (seed, epoch), minibatch SGD with
momentum on the weighted cross-entropy loss, then one evaluation-mode
forward over all active samples so every history entry for the epoch is
scored by the same post-update parameters. Stage decisions (pruning or
correction) run at the end of each post-warm-up epoch.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from . import cgp as cgp_mod
from . import fgc as fgc_mod
from .dataset import Dataset
from .errors import ConfigurationError, DegenerateRunError, NumericError
from .metrics import ConfusionMatrix, uar, war
from .model import SciuModel, backward_batch, forward_batch, init_model
from .nn_core import sgd_momentum_step

STAGES = ("plain", "cgp", "fgc")


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    momentum: float = 0.9
    batch_size: int = 64
    epochs: int = 60
    warmup_epochs: int = 15
    window_t: int = 3
    lam: float = 0.7
    tau: float = 0.2
    seed: int = 0
    score_source: str = "max_class"  # or "annotated_class"
    prob_source: str = "weighted"  # or "unweighted"
    embed_dim: int = 16
    hidden_dim: int = 4

    def validate(self) -> None:
        if self.epochs <= self.warmup_epochs + self.window_t:
            raise ConfigurationError(
                "epochs must exceed warmup_epochs + window_t"
            )
        if self.batch_size < 1:
            raise ConfigurationError("batch_size must be >= 1")
        if self.learning_rate < 0:
            raise ConfigurationError("learning_rate must be non-negative")
        if not (0.0 <= self.momentum < 1.0):
            raise ConfigurationError("momentum must be in [0, 1)")
        if self.score_source not in ("annotated_class", "max_class"):
            raise ConfigurationError(f"unknown score_source {self.score_source!r}")
        if self.prob_source not in ("weighted", "unweighted"):
            raise ConfigurationError(f"unknown prob_source {self.prob_source!r}")
        if not (0.0 < self.lam < 1.0) or not (0.0 < self.tau < 1.0):
            raise ConfigurationError("lambda and tau must be in (0, 1)")


@dataclass
class EpochRecord:
    epoch: int
    mean_loss: float
    train_war: float
    train_uar: float
    test_war: Optional[float]
    test_uar: Optional[float]
    active_sample_count: int
    cumulative_pruned: int
    cumulative_corrected: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class StageResult:
    stage: str
    model: SciuModel
    output_dataset: Optional[Dataset]
    epoch_records: list[EpochRecord]
    prune_log: list[dict] = field(default_factory=list)
    correction_events: list = field(default_factory=list)
    pruned_ids: set = field(default_factory=set)


def run_epoch(
    model: SciuModel,
    dataset: Dataset,
    config: TrainConfig,
    velocity: list[np.ndarray],
    epoch: int,
) -> tuple[float, dict[str, np.ndarray]]:
    """One pass of minibatch SGD, then an evaluation forward over the whole
    (active) dataset with the updated parameters.

    Returns (mean batch loss, eval outputs aligned with dataset order).
    """
    if len(dataset) == 0:
        raise DegenerateRunError("cannot train on an empty dataset")
    feats = dataset.features_matrix()
    labels = dataset.labels()
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, epoch, 0xE9]))
    order = rng.permutation(len(dataset))

    params = model.parameters()
    losses = []
    for start in range(0, len(order), config.batch_size):
        batch = order[start : start + config.batch_size]
        grads, loss = backward_batch(model, feats[batch], labels[batch])
        if not np.isfinite(loss):
            ids = [dataset.samples[i].id for i in batch]
            raise NumericError(
                f"non-finite loss at epoch {epoch}, batch starting {start}, "
                f"sample ids {ids}"
            )
        sgd_momentum_step(params, grads, velocity, config.learning_rate, config.momentum)
        losses.append(loss)

    eval_out = forward_batch(model, feats)
    return float(np.mean(losses)), eval_out


def _metrics(probs: np.ndarray, labels: np.ndarray, n_classes: int):
    cm = ConfusionMatrix.from_predictions(labels, np.argmax(probs, axis=1), n_classes)
    return war(cm), uar(cm)


def evaluate(model: SciuModel, dataset: Dataset, weighted: bool = False):
    """(WAR, UAR, confusion matrix) on a dataset; unweighted probs by default."""
    out = forward_batch(model, dataset.features_matrix())
    probs = out["weighted_probs"] if weighted else out["probs"]
    preds = np.argmax(probs, axis=1)
    cm = ConfusionMatrix.from_predictions(dataset.labels(), preds, dataset.n_classes)
    return war(cm), uar(cm), cm


def train_stage(
    dataset: Dataset,
    config: TrainConfig,
    stage: str,
    test_dataset: Optional[Dataset] = None,
) -> StageResult:
    """Run one full stage from a freshly initialized model.

    plain: supervised training only. cgp: additionally record weighted
    scores and prune after warm-up; output is D3. fgc: record predictions
    and correct labels after warm-up; output is D4 (same ids, new labels).
    """
    config.validate()
    if stage not in STAGES:
        raise ConfigurationError(f"unknown stage {stage!r}")
    if len(dataset) == 0:
        raise DegenerateRunError("cannot train a stage on an empty dataset")
    if dataset.dim <= 0:
        raise ConfigurationError("dataset dim must be positive")

    model = init_model(
        dataset.dim, config.embed_dim, config.hidden_dim, dataset.n_classes, config.seed
    )
    velocity = [np.zeros_like(p) for p in model.parameters()]

    prune_state = cgp_mod.PruneState(
        lam=config.lam, window=config.window_t, warmup_epochs=config.warmup_epochs
    )
    corr_state = fgc_mod.CorrectionState(tau=config.tau, window=config.window_t)

    active = dataset
    records: list[EpochRecord] = []

    for epoch in range(config.epochs):
        mean_loss, eval_out = run_epoch(model, active, config, velocity, epoch)

        if stage == "cgp" and epoch >= config.warmup_epochs:
            probs = eval_out["probs"]
            weights = eval_out["weight"]
            labels = active.labels()
            if config.score_source == "annotated_class":
                p = probs[np.arange(len(active)), labels]
            else:
                p = probs.max(axis=1)
            for i, s in enumerate(active.samples):
                cgp_mod.record_score(prune_state, s.id, float(weights[i]), float(p[i]), epoch)
            active, _ = cgp_mod.apply_pruning(prune_state, active, epoch)
            if len(active) == 0:
                raise DegenerateRunError(
                    "all samples pruned: lower lambda or extend warm-up"
                )

        if stage == "fgc" and epoch >= config.warmup_epochs:
            key = "weighted_probs" if config.prob_source == "weighted" else "probs"
            probs = eval_out[key]
            for i, s in enumerate(active.samples):
                fgc_mod.record_prediction(corr_state, s.id, probs[i], s.label, epoch)
            active, _ = fgc_mod.apply_corrections(corr_state, active, epoch)

        # Per-epoch metrics on the current active set (post-decision labels).
        ew, eu, _ = evaluate(model, active)
        if test_dataset is not None and len(test_dataset) > 0:
            tw, tu, _ = evaluate(model, test_dataset)
        else:
            tw = tu = None
        records.append(
            EpochRecord(
                epoch=epoch,
                mean_loss=mean_loss,
                train_war=ew,
                train_uar=eu,
                test_war=tw,
                test_uar=tu,
                active_sample_count=len(active),
                cumulative_pruned=len(prune_state.pruned_ids),
                cumulative_corrected=len(corr_state.corrections),
            )
        )

    output = None
    if stage == "cgp":
        output = active
    elif stage == "fgc":
        output = active
    return StageResult(
        stage=stage,
        model=model,
        output_dataset=output,
        epoch_records=records,
        prune_log=prune_state.prune_log,
        correction_events=corr_state.corrections,
        pruned_ids=prune_state.pruned_ids,
    )
