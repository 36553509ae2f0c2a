"""Command-line surface: dataset generation, pipeline runs, hyperparameter
sweeps, and report rendering.

Exit codes: 0 success, 2 usage/validation error, 3 degenerate run (e.g. all
samples pruned), 4 numeric failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .dataset import QUALITY_LOW, save_dataset
from .errors import (
    ConfigurationError,
    DegenerateRunError,
    NumericError,
    SciuError,
    ValidationError,
)
from .pipeline import PipelineConfig, run_pipeline, sweep, sweep_to_csv, write_report
from .report import render_report
from .synth import SynthConfig, generate

CLI_MODES = {"baseline": "baseline", "cgp": "cgp_only", "fgc": "fgc_only", "sciu": "sciu"}


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--learning-rate", type=float, default=PipelineConfig.learning_rate)
    p.add_argument("--momentum", type=float, default=PipelineConfig.momentum)
    p.add_argument("--batch-size", type=int, default=PipelineConfig.batch_size)
    p.add_argument("--epochs", type=int, default=PipelineConfig.epochs)
    p.add_argument("--warmup-epochs", type=int, default=PipelineConfig.warmup_epochs)
    p.add_argument("--window", type=int, default=PipelineConfig.window_t,
                   help="trailing-window length t")
    p.add_argument("--lambda", dest="lam", type=float, default=PipelineConfig.lam,
                   help="pruning threshold")
    p.add_argument("--tau", type=float, default=PipelineConfig.tau,
                   help="correction score-gap threshold")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--score-source", choices=["annotated_class", "max_class"],
                   default=PipelineConfig.score_source)
    p.add_argument("--prob-source", choices=["weighted", "unweighted"],
                   default=PipelineConfig.prob_source)
    p.add_argument("--embed-dim", type=int, default=PipelineConfig.embed_dim)
    p.add_argument("--hidden-dim", type=int, default=PipelineConfig.hidden_dim)
    p.add_argument("--train-fraction", type=float,
                   default=PipelineConfig.train_fraction)


def _config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        learning_rate=args.learning_rate,
        momentum=args.momentum,
        batch_size=args.batch_size,
        epochs=args.epochs,
        warmup_epochs=args.warmup_epochs,
        window_t=args.window,
        lam=args.lam,
        tau=args.tau,
        seed=args.seed,
        score_source=args.score_source,
        prob_source=args.prob_source,
        embed_dim=args.embed_dim,
        hidden_dim=args.hidden_dim,
        train_fraction=args.train_fraction,
    )


def _cmd_generate(args) -> int:
    config = SynthConfig(
        n_classes=args.n_classes,
        dim=args.dim,
        per_class=args.per_class,
        low_quality_rate=args.low_quality_rate,
        mislabel_rate=args.mislabel_rate,
        neutral_bias_fraction=args.neutral_bias_fraction,
        intensity_low=args.intensity_low,
        intensity_high=args.intensity_high,
        cluster_spread=args.cluster_spread,
        seed=args.seed,
    )
    dataset = generate(config)
    save_dataset(dataset, args.out)
    n_low = sum(1 for s in dataset.samples if s.quality_flag == QUALITY_LOW)
    n_mis = sum(
        1 for s in dataset.samples
        if s.true_label is not None and s.label != s.true_label
    )
    print(f"wrote {len(dataset)} samples to {args.out}")
    print(f"classes: {dataset.n_classes}  dim: {dataset.dim}")
    print(f"low_quality: {n_low}  mislabeled: {n_mis}  "
          f"clean: {len(dataset) - n_low - n_mis}")
    return 0


def _cmd_run(args) -> int:
    config = _config_from_args(args)
    report = run_pipeline(config, args.dataset, CLI_MODES[args.mode])
    if args.out_dir:
        write_report(report, args.out_dir)
        print(f"report written to {args.out_dir}/report.struct")
    ft = report["final_test"]
    print(f"mode={args.mode} pruned={report['pruned_total']} "
          f"corrected={report['corrected_total']} "
          f"test WAR={ft['war']:.4f} UAR={ft['uar']:.4f}")
    return 0


def _cmd_sweep(args) -> int:
    config = _config_from_args(args)
    values_type = int if args.param == "window" else float
    values = [values_type(v) for v in args.values.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    result = sweep(config, args.param, values, args.dataset,
                   mode=CLI_MODES[args.mode], seeds=seeds)
    csv = sweep_to_csv(result)
    if args.out:
        with open(args.out, "w") as f:
            f.write(csv)
    print(csv, end="")
    print(f"best {args.param}: {result['best_value']}")
    return 0


def _cmd_report(args) -> int:
    written = render_report(args.report, args.out_dir)
    for p in written:
        print(f"wrote {p}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sciu",
        description="Dual-stage data purification: prune low-quality samples, "
                    "correct mislabeled ones, then train on the cleaned set.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic noisy dataset")
    g.add_argument("--out", required=True)
    g.add_argument("--n-classes", type=int, default=SynthConfig.n_classes)
    g.add_argument("--dim", type=int, default=SynthConfig.dim)
    g.add_argument("--per-class", type=int, default=SynthConfig.per_class)
    g.add_argument("--low-quality-rate", type=float,
                   default=SynthConfig.low_quality_rate)
    g.add_argument("--mislabel-rate", type=float, default=SynthConfig.mislabel_rate)
    g.add_argument("--neutral-bias-fraction", type=float,
                   default=SynthConfig.neutral_bias_fraction)
    g.add_argument("--intensity-low", type=float, default=SynthConfig.intensity_low)
    g.add_argument("--intensity-high", type=float, default=SynthConfig.intensity_high)
    g.add_argument("--cluster-spread", type=float, default=SynthConfig.cluster_spread)
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=_cmd_generate)

    r = sub.add_parser("run", help="run one pipeline mode on a dataset")
    r.add_argument("--dataset", required=True)
    r.add_argument("--mode", choices=sorted(CLI_MODES), required=True)
    r.add_argument("--out-dir", default=None)
    _add_train_flags(r)
    r.set_defaults(func=_cmd_run)

    s = sub.add_parser("sweep", help="sweep lambda, tau, or the window length")
    s.add_argument("--dataset", required=True)
    s.add_argument("--param", choices=["lambda", "tau", "window"], required=True)
    s.add_argument("--values", required=True, help="comma-separated values")
    s.add_argument("--seeds", default="0", help="comma-separated seeds")
    s.add_argument("--mode", choices=sorted(CLI_MODES), default="sciu")
    s.add_argument("--out", default=None, help="CSV output path")
    _add_train_flags(s)
    s.set_defaults(func=_cmd_sweep)

    rep = sub.add_parser("report", help="render CSVs and a summary from a report")
    rep.add_argument("--report", required=True)
    rep.add_argument("--out-dir", required=True)
    rep.set_defaults(func=_cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, ValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DegenerateRunError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except NumericError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except SciuError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
