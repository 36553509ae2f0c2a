"""Read-only report rendering: per-epoch metric CSVs, weight-histogram CSV,
confusion-matrix CSV, and a plain-text stage summary."""

from __future__ import annotations

from pathlib import Path

from .pipeline import load_report


def epoch_csv(fragment: dict) -> str:
    cols = [
        "epoch", "mean_loss", "train_war", "train_uar", "test_war", "test_uar",
        "active_sample_count", "cumulative_pruned", "cumulative_corrected",
    ]
    lines = [",".join(cols)]
    for rec in fragment["epoch_records"]:
        lines.append(",".join("" if rec[c] is None else str(rec[c]) for c in cols))
    return "\n".join(lines) + "\n"


def weight_histogram_csv(summary: dict) -> str:
    lines = ["bin_low,bin_high,kept,pruned"]
    edges = summary["bin_edges"]
    for i, (k, p) in enumerate(zip(summary["kept_counts"], summary["pruned_counts"])):
        lines.append(f"{edges[i]},{edges[i + 1]},{k},{p}")
    return "\n".join(lines) + "\n"


def confusion_csv(counts: list[list[int]]) -> str:
    n = len(counts)
    header = "true\\pred," + ",".join(str(c) for c in range(n))
    lines = [header]
    for t, row in enumerate(counts):
        lines.append(f"{t}," + ",".join(str(v) for v in row))
    return "\n".join(lines) + "\n"


def summary_text(report: dict) -> str:
    ft = report["final_test"]
    lines = [
        f"mode: {report['mode']}",
        f"pruned: {report['pruned_total']}  corrected: {report['corrected_total']}",
        f"final test WAR: {ft['war']:.4f}  UAR: {ft['uar']:.4f}",
        f"final test WAR (weighted probs): {ft['war_weighted']:.4f}  "
        f"UAR (weighted probs): {ft['uar_weighted']:.4f}",
    ]
    pq = report.get("pruning_quality")
    if pq is not None:
        prec = "n/a" if pq["precision"] is None else f"{pq['precision']:.4f}"
        rec = "n/a" if pq["recall"] is None else f"{pq['recall']:.4f}"
        lines.append(f"pruning precision: {prec}  recall: {rec}")
    cq = report.get("correction_quality")
    if cq is not None:
        acc = "n/a" if cq["correction_accuracy"] is None else f"{cq['correction_accuracy']:.4f}"
        harm = "n/a" if cq["harmful_rate"] is None else f"{cq['harmful_rate']:.4f}"
        lines.append(f"correction accuracy: {acc}  harmful rate: {harm}")
    ws = report.get("weight_summary")
    if ws is not None and ws["mean_weight_pruned"] is not None:
        lines.append(
            f"mean weight kept: {ws['mean_weight_kept']:.4f}  "
            f"pruned: {ws['mean_weight_pruned']:.4f}"
        )
    return "\n".join(lines) + "\n"


def render_report(report_path: str | Path, out_dir: str | Path) -> list[Path]:
    """Emit all CSV sidecars and the text summary for one report file."""
    report = load_report(report_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    for i, frag in enumerate(report["stages"]):
        p = out / f"epochs_{i}_{frag['role']}.csv"
        p.write_text(epoch_csv(frag))
        written.append(p)

    ws = report.get("weight_summary")
    if ws is not None:
        p = out / "weight_histogram.csv"
        p.write_text(weight_histogram_csv(ws))
        written.append(p)

    p = out / "confusion_matrix.csv"
    p.write_text(confusion_csv(report["final_test"]["confusion_matrix"]))
    written.append(p)

    p = out / "summary.txt"
    p.write_text(summary_text(report))
    written.append(p)
    return written
