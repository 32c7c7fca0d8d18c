"""Benchmark command line: run experiments, baselines, synthetic data, tables.

Subcommands:
  run           boosted-ensemble experiment with depth selection
  baseline-sae  single-autoencoder baseline at a fixed depth
  synth         write a labeled synthetic benchmark CSV
  report        merge report JSONs into AUCPR/diversity tables

Set AEBOOST_WORKERS to parallelize independent (run, depth) executions;
results are identical regardless of the worker count.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .autoencoder import ArchitectureSpec, TrainConfig, layer_sizes
from .data import Dataset, load_csv, make_synthetic, normalize_min_max, save_labeled_csv
from .ensemble import run_boosting, run_manifest, selection_from_results
from .estimators import SingleAutoencoderBaseline
from .exceptions import ConfigurationError, DataError, MetricUndefinedError
from .metrics import (average_precision, component_rankings, ensemble_diversity,
                      outlier_ratio, per_component_ap)
from .report import (aucpr_table, build_report, component_ap_summary, diversity_table,
                     load_report, outlier_ratio_rows, render_aligned, rows_to_csv,
                     write_report, write_scores_csv)
from .seeding import splitmix64

WORKERS_ENV = "AEBOOST_WORKERS"


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _boost_task(payload):
    matrix, ensemble_size, depth, config, seed, alpha = payload
    return run_boosting(matrix, ensemble_size, depth, config, seed=seed, alpha=alpha)


def _run_tasks(task_fn, payloads):
    workers = worker_count()
    if workers > 1 and len(payloads) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(task_fn, payloads))
    return [task_fn(p) for p in payloads]


def _add_data_args(parser):
    parser.add_argument("--data", required=True, help="input CSV path")
    parser.add_argument("--label-col", default=None,
                        help="label column name (or index with --no-header); 1 = outlier")
    parser.add_argument("--no-header", action="store_true",
                        help="the CSV has no header row")
    parser.add_argument("--delimiter", default=",", help="CSV delimiter")


def _add_train_args(parser):
    parser.add_argument("--alpha", type=float, default=0.5,
                        help="encoder width shrink factor")
    parser.add_argument("--epochs", type=int, default=50, help="max epochs per component")
    parser.add_argument("--convergence-tol", type=float, default=1e-4,
                        help="early-stop threshold on epoch-average loss delta")
    parser.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    parser.add_argument("--weight-decay", type=float, default=1e-5,
                        help="coupled L2 weight decay")
    parser.add_argument("--batch-size", type=int, default=32, help="mini-batch size")
    parser.add_argument("--runs", type=int, default=1, help="independent repetitions")
    parser.add_argument("--seed", type=int, default=0, help="master seed")
    parser.add_argument("--out", default="aeboost_out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aeboost",
        description="Boosted autoencoder ensembles for unsupervised outlier detection")
    parser.add_argument("--version", action="version", version=f"aeboost {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the boosted-ensemble experiment")
    _add_data_args(p_run)
    p_run.add_argument("--ensemble-size", type=int, default=20,
                       help="number of boosting iterations (>= 2)")
    p_run.add_argument("--depths", default="3,5,7,9",
                       help="comma-separated candidate depths")
    _add_train_args(p_run)
    p_run.add_argument("--full-diagnostics", action="store_true",
                       help="embed per-iteration sample index lists in the report")
    p_run.set_defaults(func=cmd_run)

    p_base = sub.add_parser("baseline-sae", help="single-autoencoder baseline")
    _add_data_args(p_base)
    p_base.add_argument("--depth", type=int, default=9, help="total layer count")
    _add_train_args(p_base)
    p_base.set_defaults(func=cmd_baseline_sae)

    p_synth = sub.add_parser("synth", help="write a labeled synthetic benchmark CSV")
    p_synth.add_argument("--inliers", type=int, required=True)
    p_synth.add_argument("--outliers", type=int, required=True)
    p_synth.add_argument("--dim", type=int, default=2)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output CSV path")
    p_synth.set_defaults(func=cmd_synth)

    p_rep = sub.add_parser("report", help="merge report JSONs into tables")
    p_rep.add_argument("reports", nargs="+", help="report.json paths")
    p_rep.add_argument("--out", default="aeboost_tables", help="output directory")
    p_rep.set_defaults(func=cmd_report)

    return parser


def _load_input(args) -> Dataset:
    label_col = args.label_col
    if label_col is not None and args.no_header:
        try:
            label_col = int(label_col)
        except ValueError:
            raise DataError("--label-col must be a column index when --no-header is set")
    ds = load_csv(args.data, label_column=label_col,
                  has_header=not args.no_header, delimiter=args.delimiter)
    return normalize_min_max(ds)


def _dataset_info(args, ds: Dataset) -> dict:
    return {
        "name": Path(args.data).stem,
        "path": str(args.data),
        "n": ds.n,
        "dim": ds.dim,
        "label_column": args.label_col,
        "n_outliers": ds.outlier_count if ds.labels is not None else None,
        "normalization": ds.provenance.get("normalization"),
    }


def _train_config(args) -> TrainConfig:
    return TrainConfig(max_epochs=args.epochs, convergence_tol=args.convergence_tol,
                       batch_size=args.batch_size, learning_rate=args.lr,
                       weight_decay=args.weight_decay, seed=args.seed)


def _warn_if_unlabeled(ds: Dataset) -> None:
    if ds.labels is None:
        print("warning: dataset has no labels; scores will be written but "
              "AUCPR/diversity metrics are omitted", file=sys.stderr)


def cmd_run(args) -> int:
    if args.ensemble_size < 2:
        raise ConfigurationError("--ensemble-size must be >= 2: the consensus discards "
                                 "the first component")
    if args.runs < 1:
        raise ConfigurationError("--runs must be >= 1")
    try:
        depths = sorted({int(tok) for tok in args.depths.split(",") if tok.strip()})
    except ValueError:
        raise ConfigurationError(f"cannot parse --depths {args.depths!r}")
    if not depths:
        raise ConfigurationError("--depths must name at least one candidate")

    ds = _load_input(args)
    _warn_if_unlabeled(ds)
    config = _train_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    run_seeds = [splitmix64(args.seed, k) for k in range(args.runs)]
    payloads = [(ds.matrix, args.ensemble_size, depth, config,
                 splitmix64(run_seed, depth), args.alpha)
                for run_seed in run_seeds for depth in depths]
    results = _run_tasks(_boost_task, payloads)

    run_records = []
    for k in range(args.runs):
        by_depth = {depth: results[k * len(depths) + j] for j, depth in enumerate(depths)}
        sel = selection_from_results(by_depth)
        best = sel.best
        record = {
            "run_index": k,
            "seed": run_seeds[k],
            "chosen_depth": sel.chosen_depth,
            "depth_errors": {str(d): v for d, v in sel.objectives.items()},
            "layer_sizes": layer_sizes(ArchitectureSpec(ds.dim, sel.chosen_depth,
                                                        alpha=args.alpha)),
            "scores_file": f"scores_run{k}.csv",
            "aucpr": None,
            "diversity": None,
            "per_component_aucpr": None,
            "component_aucpr_summary": None,
            "outlier_ratios": None,
        }
        if ds.labels is not None:
            record["aucpr"] = average_precision(best.scores, ds.labels)
            if args.ensemble_size >= 3:
                record["diversity"] = ensemble_diversity(component_rankings(best.state))
            pc_ap = per_component_ap(best.state, ds.labels)
            record["per_component_aucpr"] = [float(v) for v in pc_ap]
            record["component_aucpr_summary"] = component_ap_summary(pc_ap)
            record["outlier_ratios"] = [
                outlier_ratio(diag["next_sample_indices"], ds.labels)
                for diag in best.diagnostics]
        record["manifest"] = run_manifest(best, args.ensemble_size, config,
                                          alpha=args.alpha,
                                          include_sample_indices=args.full_diagnostics)
        write_scores_csv(out_dir / record["scores_file"], best.scores, ds.labels)
        run_records.append(record)

    config_echo = {
        "ensemble_size": args.ensemble_size,
        "depths": depths,
        "alpha": args.alpha,
        "epochs": args.epochs,
        "convergence_tol": args.convergence_tol,
        "learning_rate": args.lr,
        "weight_decay": args.weight_decay,
        "weight_decay_mode": "coupled_l2",
        "batch_size": args.batch_size,
        "runs": args.runs,
        "seed": args.seed,
        "feature_scaling": "min-max to [0,1]",
    }
    report = build_report("boosted-ensemble", _dataset_info(args, ds),
                          config_echo, run_records)
    write_report(report, out_dir / "report.json")

    agg = report["aggregate"]
    line = f"boosted-ensemble on {report['dataset']['name']}: {args.runs} run(s)"
    if "aucpr_mean" in agg:
        line += f", mean AUCPR {agg['aucpr_mean']:.4f}"
    line += f", chosen depths {agg.get('chosen_depths')}"
    print(line)
    print(f"report: {out_dir / 'report.json'}")
    return 0


def _baseline_task(payload):
    matrix, depth, alpha, config, seed = payload
    est = SingleAutoencoderBaseline(depth=depth, alpha=alpha, epochs=config.max_epochs,
                                    convergence_tol=config.convergence_tol,
                                    batch_size=config.batch_size,
                                    learning_rate=config.learning_rate,
                                    weight_decay=config.weight_decay,
                                    random_state=seed).fit(matrix)
    return est.decision_scores_, est.model_.sizes, est.loss_trace_


def cmd_baseline_sae(args) -> int:
    if args.runs < 1:
        raise ConfigurationError("--runs must be >= 1")
    ds = _load_input(args)
    _warn_if_unlabeled(ds)
    config = _train_config(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    run_seeds = [splitmix64(args.seed, k) for k in range(args.runs)]
    payloads = [(ds.matrix, args.depth, args.alpha, config, seed) for seed in run_seeds]
    results = _run_tasks(_baseline_task, payloads)

    run_records = []
    for k, (scores, sizes, trace) in enumerate(results):
        record = {
            "run_index": k,
            "seed": run_seeds[k],
            "depth": args.depth,
            "layer_sizes": sizes,
            "epochs_run": len(trace),
            "final_loss": trace[-1],
            "scores_file": f"scores_run{k}.csv",
            "aucpr": None,
        }
        if ds.labels is not None:
            record["aucpr"] = average_precision(scores, ds.labels)
        write_scores_csv(out_dir / record["scores_file"], scores, ds.labels)
        run_records.append(record)

    config_echo = {
        "depth": args.depth,
        "alpha": args.alpha,
        "epochs": args.epochs,
        "convergence_tol": args.convergence_tol,
        "learning_rate": args.lr,
        "weight_decay": args.weight_decay,
        "weight_decay_mode": "coupled_l2",
        "batch_size": args.batch_size,
        "runs": args.runs,
        "seed": args.seed,
        "feature_scaling": "min-max to [0,1]",
    }
    report = build_report("single-autoencoder", _dataset_info(args, ds),
                          config_echo, run_records)
    write_report(report, out_dir / "report.json")

    agg = report["aggregate"]
    line = f"single-autoencoder on {report['dataset']['name']}: {args.runs} run(s)"
    if "aucpr_mean" in agg:
        line += f", mean AUCPR {agg['aucpr_mean']:.4f}"
    print(line)
    print(f"report: {out_dir / 'report.json'}")
    return 0


def cmd_synth(args) -> int:
    ds = make_synthetic(args.inliers, args.outliers, args.dim, args.seed)
    out = Path(args.out)
    if out.parent != Path(""):
        out.parent.mkdir(parents=True, exist_ok=True)
    save_labeled_csv(ds, out)
    print(f"wrote {out}: {ds.n} rows, dim {ds.dim}, "
          f"{ds.outlier_count} outliers ({100 * ds.outlier_fraction:.2f}%)")
    return 0


def cmd_report(args) -> int:
    reports = [load_report(p) for p in args.reports]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    aucpr_rows = aucpr_table(reports)
    (out_dir / "aucpr_table.csv").write_text(rows_to_csv(aucpr_rows))
    aucpr_text = render_aligned(aucpr_rows)
    (out_dir / "aucpr_table.txt").write_text(aucpr_text)

    div_rows = diversity_table(reports)
    (out_dir / "diversity_table.csv").write_text(rows_to_csv(div_rows))
    div_text = render_aligned(div_rows)
    (out_dir / "diversity_table.txt").write_text(div_text)

    ratio_rows = outlier_ratio_rows(reports)
    (out_dir / "outlier_ratios.csv").write_text(rows_to_csv(ratio_rows))

    print("AUCPR (%, mean over runs)")
    print(aucpr_text)
    print("Ensemble diversity (mean over runs)")
    print(div_text)
    print(f"tables written to {out_dir}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, DataError, MetricUndefinedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
