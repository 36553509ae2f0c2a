"""Acceptance gate: ten end-to-end criteria, each printing one PASS/FAIL line.

Run with `pytest -s tests/test_acceptance.py` to see the lines as they
complete. The shared fixtures run every pipeline mode over five seeds on the
default synthetic dataset; individual criteria read from those cached runs
where possible.
"""

import statistics

import numpy as np
import pytest

from sciu.cgp import PruneState, ScoreHistory, record_score, trailing_mean, prune_decision
from sciu.dataset import QUALITY_LOW
from sciu.fgc import PredictionHistory, correction_decision, label_stable, score_gap
from sciu.model import backward_batch, batch_loss, init_model
from sciu.nn_core import finite_difference_gradient
from sciu.pipeline import PipelineConfig, report_to_json, run_pipeline, sweep
from sciu.synth import SynthConfig, generate

SEEDS = [0, 1, 2, 3, 4]
MODES = ["baseline", "cgp_only", "fgc_only", "sciu"]


def report_line(num, ok, detail):
    print(f"CRITERION {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {num} failed: {detail}"


@pytest.fixture(scope="module")
def datasets():
    return {seed: generate(SynthConfig(seed=seed)) for seed in SEEDS}


@pytest.fixture(scope="module")
def mode_reports(datasets):
    reports = {mode: {} for mode in MODES}
    for seed in SEEDS:
        for mode in MODES:
            cfg = PipelineConfig(seed=seed)
            reports[mode][seed] = run_pipeline(cfg, datasets[seed], mode)
    return reports


def test_criterion_1_gradient_correctness():
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        model = init_model(8, 8, 4, 5, seed=seed)
        feats = rng.standard_normal((3, 8))
        labels = rng.integers(0, 5, 3)
        grads, _ = backward_batch(model, feats, labels)
        fd = finite_difference_gradient(
            lambda: batch_loss(model, feats, labels), model.parameters()
        )
        for g, f in zip(grads, fd):
            rel = np.abs(g - f).max() / max(np.abs(f).max(), 1e-8)
            worst = max(worst, rel)
    report_line(1, worst <= 1e-4, f"max relative gradient error {worst:.2e}")


def test_criterion_2_unit_oracles():
    rng = np.random.default_rng(0)
    checks = 0
    for _ in range(1000):
        t = int(rng.integers(1, 6))
        n = int(rng.integers(1, 9))
        # score path: product, trailing mean, threshold decision
        weights = rng.uniform(1e-6, 1 - 1e-6, n)
        probs = rng.uniform(0, 1, n)
        sh = ScoreHistory(0, window=t)
        for w, p in zip(weights, probs):
            sh.record(float(w) * float(p))
        products = weights * probs
        mean = trailing_mean(sh)
        if n < t:
            assert mean is None
        else:
            expect = products[-t:].mean()
            assert abs(mean - expect) <= 1e-12
            lam = float(rng.uniform(0.05, 0.95))
            assert prune_decision(mean, lam) == (mean > lam)
        # prediction path: stability, gap, conjunction decision
        labels = rng.integers(0, 4, n)
        p_pred = rng.uniform(0, 1, n)
        p_gt = rng.uniform(0, 1, n)
        ph = PredictionHistory(0, window=t)
        for y, pp, pg in zip(labels, p_pred, p_gt):
            ph.record(int(y), float(pp), float(pg))
        stable = n >= t and len(set(labels[-t:].tolist())) == 1
        assert label_stable(ph) == stable
        tau = float(rng.uniform(0.05, 0.95))
        if n >= t:
            gap = p_pred[-t:].mean() - p_gt[-t:].mean()
            assert abs(score_gap(ph) - gap) <= 1e-12
            assert correction_decision(ph, tau) == (stable and gap > tau)
        else:
            assert correction_decision(ph, tau) is False
        checks += 1
    report_line(2, checks == 1000, f"{checks} random histories recomputed exactly")


def test_criterion_3_partition_invariants(mode_reports):
    rep = mode_reports["sciu"][0]
    cgp_frag = rep["stages"][0]
    fgc_frag = rep["stages"][1]
    n_initial = cgp_frag["epoch_records"][0]["active_sample_count"] + \
        cgp_frag["epoch_records"][0]["cumulative_pruned"]
    ok = True
    for rec in cgp_frag["epoch_records"]:
        ok &= rec["active_sample_count"] + rec["cumulative_pruned"] == n_initial
    n_after_prune = n_initial - rep["pruned_total"]
    for rec in fgc_frag["epoch_records"]:
        ok &= rec["active_sample_count"] == n_after_prune
    pruned_ids = {e["sample_id"] for e in cgp_frag["prune_log"]}
    ok &= len(pruned_ids) == rep["pruned_total"]
    report_line(
        3,
        ok,
        f"pruned+active == {n_initial} every epoch; corrected set keeps "
        f"{n_after_prune} samples",
    )


def test_criterion_4_threshold_monotonicity():
    rng = np.random.default_rng(1)
    n = 1000
    score_means = rng.uniform(0, 1, n)
    prev = set()
    mono_prune = True
    for lam in (0.5, 0.6, 0.7, 0.8, 0.9):
        pruned = {i for i in range(n) if not prune_decision(score_means[i], lam)}
        mono_prune &= prev <= pruned
        prev = pruned

    histories = {}
    for i in range(n):
        y = int(rng.integers(0, 4))
        h = PredictionHistory(i, window=3)
        for _ in range(3):
            h.record(y, float(rng.uniform(0, 1)), float(rng.uniform(0, 1)))
        histories[i] = h
    prev_acc = None
    mono_corr = True
    for tau in (0.1, 0.2, 0.3, 0.4, 0.5):
        accepted = {i for i, h in histories.items() if correction_decision(h, tau)}
        if prev_acc is not None:
            mono_corr &= accepted <= prev_acc
        prev_acc = accepted
    report_line(
        4,
        mono_prune and mono_corr,
        "pruned sets grow with lambda; accepted sets shrink with tau",
    )


def test_criterion_5_purification_efficacy(datasets, mode_reports):
    precisions, recalls, accs, harms, base_rates = [], [], [], [], []
    for seed in SEEDS:
        rep = mode_reports["sciu"][seed]
        pq = rep["pruning_quality"]
        cq = rep["correction_quality"]
        precisions.append(pq["precision"])
        recalls.append(pq["recall"])
        accs.append(cq["correction_accuracy"])
        harms.append(cq["harmful_rate"])
        base_rates.append(
            float(np.mean([
                s.quality_flag == QUALITY_LOW for s in datasets[seed].samples
            ]))
        )
    med = statistics.median
    base = med(base_rates)
    ok = (
        med(precisions) >= 2 * base
        and med(recalls) >= 0.5
        and med(accs) >= 0.7
        and med(harms) <= 0.1
    )
    report_line(
        5,
        ok,
        f"median precision {med(precisions):.3f} (>= {2 * base:.3f}), "
        f"recall {med(recalls):.3f}, correction accuracy {med(accs):.3f}, "
        f"harmful rate {med(harms):.3f}",
    )


def test_criterion_6_ablation_direction(mode_reports):
    med = {
        mode: statistics.median(
            mode_reports[mode][seed]["final_test"]["war_true"] for seed in SEEDS
        )
        for mode in MODES
    }
    ok = (
        med["sciu"] > med["baseline"]
        and med["cgp_only"] > med["baseline"]
        and med["sciu"] >= max(med["cgp_only"], med["fgc_only"]) - 0.005
    )
    report_line(
        6,
        ok,
        "median true-label WAR "
        + " ".join(f"{m}={med[m]:.4f}" for m in MODES),
    )


def test_criterion_7_weight_separation(mode_reports):
    gaps = []
    for seed in SEEDS:
        ws = mode_reports["sciu"][seed]["weight_summary"]
        gaps.append(ws["mean_weight_kept"] - ws["mean_weight_pruned"])
    gap = statistics.median(gaps)
    report_line(7, gap >= 0.1, f"median kept-vs-pruned weight gap {gap:.3f}")


def test_criterion_8_interior_optimum(datasets):
    values = [0.5, 0.6, 0.7, 0.8, 0.9]
    result = sweep(
        PipelineConfig(),
        "lambda",
        values,
        datasets[0],
        mode="cgp_only",
        seeds=[0, 1, 2],
    )
    best = result["best_value"]
    report_line(
        8,
        best not in (values[0], values[-1]),
        f"lambda sweep optimum at {best}, interior of {values}",
    )


def test_criterion_9_determinism(datasets, mode_reports):
    first = report_to_json(mode_reports["sciu"][0])
    second = report_to_json(run_pipeline(PipelineConfig(seed=0), datasets[0], "sciu"))
    report_line(
        9,
        first == second,
        f"two identical runs serialize to the same {len(first)} bytes",
    )


def test_criterion_10_oracle_quarantine(datasets, mode_reports):
    stripped = datasets[0].without_oracle_fields()
    rep = run_pipeline(PipelineConfig(seed=0), stripped, "sciu")
    ref = mode_reports["sciu"][0]

    def decisions(r):
        return [
            (frag["role"], frag["prune_log"], frag["correction_events"])
            for frag in r["stages"]
        ]

    same = decisions(rep) == decisions(ref)
    report_line(
        10,
        same,
        "pruning and correction logs identical with oracle fields removed",
    )
