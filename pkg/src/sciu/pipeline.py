"""Pipeline orchestration: mode composition (baseline / pruning only /
correction only / both), report assembly, and hyperparameter sweeps.

A RunReport is a plain JSON-serializable dict written with sorted keys and
fixed separators, so identical configs and seeds produce byte-identical
report files.
"""

from __future__ import annotations

import json
import statistics
from dataclasses import dataclass, asdict
from pathlib import Path
from typing import Optional

import numpy as np

from .dataset import Dataset, load_dataset, stratified_split
from .errors import ConfigurationError, EvaluationError, SciuError
from .metrics import ConfusionMatrix, correction_quality, pruning_quality, uar, war
from .model import forward_batch
from .trainer import StageResult, TrainConfig, evaluate, train_stage

MODES = ("baseline", "cgp_only", "fgc_only", "sciu")

HIST_BINS = 20


@dataclass
class PipelineConfig(TrainConfig):
    train_fraction: float = 0.8

    def validate(self) -> None:
        super().validate()
        if not (0.0 < self.train_fraction < 1.0):
            raise ConfigurationError("train_fraction must be in (0, 1)")


def _stage_fragment(result: StageResult, role: str) -> dict:
    return {
        "role": role,
        "stage": result.stage,
        "epoch_records": [r.to_dict() for r in result.epoch_records],
        "prune_log": result.prune_log,
        "correction_events": [e.to_dict() for e in result.correction_events],
    }


def _weight_summary(result: StageResult, train: Dataset) -> dict:
    """Final CGP-stage weights for every training sample, split kept vs
    pruned (evaluation-only forward over the full set)."""
    out = forward_batch(result.model, train.features_matrix())
    weights = out["weight"]
    pruned_mask = np.array([s.id in result.pruned_ids for s in train.samples])
    edges = np.linspace(0.0, 1.0, HIST_BINS + 1)
    kept_w = weights[~pruned_mask]
    pruned_w = weights[pruned_mask]
    kept_hist, _ = np.histogram(kept_w, bins=edges)
    pruned_hist, _ = np.histogram(pruned_w, bins=edges)
    return {
        "bin_edges": [float(e) for e in edges],
        "kept_counts": [int(c) for c in kept_hist],
        "pruned_counts": [int(c) for c in pruned_hist],
        "mean_weight_kept": float(kept_w.mean()) if kept_w.size else None,
        "mean_weight_pruned": float(pruned_w.mean()) if pruned_w.size else None,
    }


def _true_label_metrics(model, test: Dataset):
    """WAR/UAR against oracle true labels; (None, None) when the oracle is
    absent. Evaluation-only use of the oracle fields."""
    truth = test.oracle_true_labels()
    if any(v is None for v in truth.values()):
        return None, None
    out = forward_batch(model, test.features_matrix())
    preds = np.argmax(out["probs"], axis=1)
    labels = np.array([truth[s.id] for s in test.samples])
    cm = ConfusionMatrix.from_predictions(labels, preds, test.n_classes)
    return war(cm), uar(cm)


def run_pipeline(
    config: PipelineConfig,
    dataset: Dataset | str | Path,
    mode: str,
    out_dir: Optional[str | Path] = None,
) -> dict:
    """Run one experiment end to end and return its RunReport dict.

    baseline: plain training on D1. cgp_only: CGP stage then plain training
    on D3. fgc_only: FGC stage then plain training on D4. sciu: CGP, then
    FGC on D3, then plain training on the corrected D4.
    """
    config.validate()
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode {mode!r}, expected one of {MODES}")
    if not isinstance(dataset, Dataset):
        dataset = load_dataset(dataset)

    train, test = stratified_split(dataset, config.train_fraction, config.seed)

    stages: list[dict] = []
    weight_summary = None
    pruned_ids: set[int] = set()
    correction_events = []
    final_train = train

    if mode in ("cgp_only", "sciu"):
        cgp_result = train_stage(train, config, "cgp", test)
        stages.append(_stage_fragment(cgp_result, "cgp"))
        weight_summary = _weight_summary(cgp_result, train)
        pruned_ids = set(cgp_result.pruned_ids)
        final_train = cgp_result.output_dataset

    if mode in ("fgc_only", "sciu"):
        fgc_result = train_stage(final_train, config, "fgc", test)
        stages.append(_stage_fragment(fgc_result, "fgc"))
        correction_events = fgc_result.correction_events
        final_train = fgc_result.output_dataset

    final_result = train_stage(final_train, config, "plain", test)
    stages.append(_stage_fragment(final_result, "final"))

    test_war, test_uar, cm = evaluate(final_result.model, test)
    test_war_w, test_uar_w, _ = evaluate(final_result.model, test, weighted=True)
    test_war_true, test_uar_true = _true_label_metrics(final_result.model, test)

    try:
        pq = pruning_quality(pruned_ids, train) if pruned_ids else None
    except EvaluationError:
        pq = None
    try:
        cq = correction_quality(correction_events, train) if correction_events else None
    except EvaluationError:
        cq = None

    report = {
        "mode": mode,
        "config": asdict(config),
        "stages": stages,
        "pruned_total": len(pruned_ids),
        "corrected_total": len(correction_events),
        "final_test": {
            "war": test_war,
            "uar": test_uar,
            "war_weighted": test_war_w,
            "uar_weighted": test_uar_w,
            "war_true": test_war_true,
            "uar_true": test_uar_true,
            "confusion_matrix": cm.counts.tolist(),
        },
        "pruning_quality": pq,
        "correction_quality": cq,
        "weight_summary": weight_summary,
    }

    if out_dir is not None:
        write_report(report, out_dir)
    return report


def report_to_json(report: dict) -> str:
    return json.dumps(report, sort_keys=True, separators=(",", ":"))


def write_report(report: dict, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.snapshot").write_text(
        json.dumps(
            {"mode": report["mode"], "config": report["config"]},
            sort_keys=True,
            indent=2,
        )
        + "\n"
    )
    path = out / "report.struct"
    path.write_text(report_to_json(report) + "\n")
    return path


def load_report(path: str | Path) -> dict:
    text = Path(path).read_text()
    try:
        report = json.loads(text)
    except json.JSONDecodeError as e:
        raise SciuError(f"{path}: corrupt report: {e}") from e
    if not isinstance(report, dict) or "mode" not in report:
        raise SciuError(f"{path}: not a RunReport")
    return report


SWEEP_PARAMS = {"lambda": "lam", "tau": "tau", "window": "window_t"}


def sweep(
    config: PipelineConfig,
    parameter: str,
    values: list,
    dataset: Dataset | str | Path,
    mode: str = "sciu",
    seeds: Optional[list[int]] = None,
) -> dict:
    """Run the pipeline once per (value, seed) and tabulate median WAR/UAR.

    Child-run failures are recorded as failure markers rather than aborting
    the whole sweep.
    """
    if parameter not in SWEEP_PARAMS:
        raise ConfigurationError(
            f"unknown sweep parameter {parameter!r}, expected one of {sorted(SWEEP_PARAMS)}"
        )
    if len(values) < 1:
        raise ConfigurationError("sweep needs at least one value")
    attr = SWEEP_PARAMS[parameter]
    if seeds is None:
        seeds = [config.seed]
    if not isinstance(dataset, Dataset):
        dataset = load_dataset(dataset)

    rows = []
    for value in values:
        wars, uars, wars_true, failures = [], [], [], []
        for seed in seeds:
            cfg = PipelineConfig(**{**asdict(config), attr: value, "seed": seed})
            try:
                rep = run_pipeline(cfg, dataset, mode)
                wars.append(rep["final_test"]["war"])
                uars.append(rep["final_test"]["uar"])
                if rep["final_test"]["war_true"] is not None:
                    wars_true.append(rep["final_test"]["war_true"])
            except SciuError as e:
                failures.append({"seed": seed, "error": str(e)})
        rows.append(
            {
                "value": value,
                "median_war": statistics.median(wars) if wars else None,
                "median_uar": statistics.median(uars) if uars else None,
                "median_war_true": statistics.median(wars_true) if wars_true else None,
                "per_seed_war": wars,
                "failures": failures,
            }
        )
    # Rank by true-label WAR when the oracle is available, else annotated.
    key = (
        "median_war_true"
        if all(r["median_war_true"] is not None for r in rows)
        else "median_war"
    )
    scored = [r for r in rows if r[key] is not None]
    best = max(scored, key=lambda r: r[key])["value"] if scored else None
    return {"parameter": parameter, "mode": mode, "seeds": seeds, "rows": rows,
            "best_value": best}


def sweep_to_csv(result: dict) -> str:
    lines = ["value,median_war,median_uar,median_war_true,n_failures"]
    for r in result["rows"]:
        w = "" if r["median_war"] is None else f"{r['median_war']:.6f}"
        u = "" if r["median_uar"] is None else f"{r['median_uar']:.6f}"
        t = "" if r["median_war_true"] is None else f"{r['median_war_true']:.6f}"
        lines.append(f"{r['value']},{w},{u},{t},{len(r['failures'])}")
    return "\n".join(lines) + "\n"
