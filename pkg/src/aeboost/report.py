"""Experiment report files and aggregate tables.

A report is a single JSON document that fully describes one experiment:
config echo, dataset provenance, per-run metrics and manifests, and
aggregates. Everything in it except the ``created_at`` stamp is reproducible
from (config, seed). Scores live next to it as plain CSV, one file per run,
written with full-precision floats so repeated runs are byte-identical.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .exceptions import DataError

SCHEMA_VERSION = 1


def build_report(method: str, dataset_info: dict, config: dict,
                 run_records: list[dict]) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "aeboost",
        "tool_version": tool_version(),
        "created_at": datetime.now(timezone.utc).isoformat(),
        "method": method,
        "dataset": dataset_info,
        "config": config,
        "runs": run_records,
        "aggregate": aggregate_runs(run_records),
    }


def tool_version() -> str:
    from . import __version__
    return __version__


def aggregate_runs(run_records: list[dict]) -> dict:
    agg: dict = {"n_runs": len(run_records)}
    aucprs = [r["aucpr"] for r in run_records if r.get("aucpr") is not None]
    if aucprs:
        agg["aucpr_mean"] = float(np.mean(aucprs))
        agg["aucpr_std"] = float(np.std(aucprs))
    diversities = [r["diversity"] for r in run_records if r.get("diversity") is not None]
    if diversities:
        agg["diversity_mean"] = float(np.mean(diversities))
    depths = [r["chosen_depth"] for r in run_records if "chosen_depth" in r]
    if depths:
        agg["chosen_depths"] = depths
    ratio_series = [r["outlier_ratios"] for r in run_records
                    if r.get("outlier_ratios") is not None]
    if ratio_series:
        agg["outlier_ratio_mean_per_iteration"] = [
            float(v) for v in np.mean(np.asarray(ratio_series), axis=0)]
    return agg


def component_ap_summary(per_component_ap: np.ndarray) -> dict:
    """Box-plot statistics of the per-component average precisions."""
    values = np.asarray(per_component_ap, dtype=np.float64)
    return {
        "min": float(values.min()),
        "q1": float(np.percentile(values, 25)),
        "median": float(np.median(values)),
        "q3": float(np.percentile(values, 75)),
        "max": float(values.max()),
    }


def write_report(report: dict, path: str | Path) -> None:
    Path(path).write_text(json.dumps(report, indent=2) + "\n")


def load_report(path: str | Path) -> dict:
    path = Path(path)
    try:
        report = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
    if report.get("schema_version") != SCHEMA_VERSION:
        raise DataError(
            f"{path}: report schema version {report.get('schema_version')!r} "
            f"does not match expected {SCHEMA_VERSION}")
    return report


def write_scores_csv(path: str | Path, scores: np.ndarray,
                     labels: np.ndarray | None = None) -> None:
    """Scores file: instance id, score, and the label when known."""
    lines = ["instance,score,label" if labels is not None else "instance,score"]
    for i, score in enumerate(scores):
        row = f"{i},{float(score)!r}"
        if labels is not None:
            row += f",{int(labels[i])}"
        lines.append(row)
    Path(path).write_text("\n".join(lines) + "\n")


def percent(value: float) -> str:
    """AUCPR fraction -> percentage with one decimal (0.9671 -> '96.7')."""
    return f"{100.0 * value:.1f}"


def render_aligned(rows: list[list[str]]) -> str:
    """Fixed-width text table; first column left-aligned, rest right-aligned."""
    widths = [max(len(row[j]) for row in rows) for j in range(len(rows[0]))]
    lines = []
    for row in rows:
        cells = [row[0].ljust(widths[0])]
        cells += [cell.rjust(widths[j]) for j, cell in enumerate(row) if j > 0]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def _cells(reports: list[dict]) -> dict:
    """(dataset, method) -> list of per-run records, pooled across reports."""
    pooled: dict[tuple[str, str], list[dict]] = {}
    for report in reports:
        key = (report["dataset"]["name"], report["method"])
        pooled.setdefault(key, []).extend(report["runs"])
    return pooled


def _table(reports: list[dict], field: str, fmt) -> list[list[str]]:
    pooled = _cells(reports)
    datasets = sorted({k[0] for k in pooled})
    methods = sorted({k[1] for k in pooled})
    rows = [["dataset"] + methods]
    for ds in datasets:
        row = [ds]
        for method in methods:
            values = [r[field] for r in pooled.get((ds, method), [])
                      if r.get(field) is not None]
            row.append(fmt(float(np.mean(values))) if values else "-")
        rows.append(row)
    return rows


def aucpr_table(reports: list[dict]) -> list[list[str]]:
    """Dataset x method table of mean AUCPR, in percent with one decimal."""
    return _table(reports, "aucpr", percent)


def diversity_table(reports: list[dict]) -> list[list[str]]:
    """Dataset x method table of mean ensemble diversity."""
    return _table(reports, "diversity", lambda v: f"{v:.3f}")


def outlier_ratio_rows(reports: list[dict]) -> list[list[str]]:
    """Long-form rows (dataset, method, iteration, mean ratio) for plotting."""
    pooled = _cells(reports)
    rows = [["dataset", "method", "iteration", "mean_outlier_ratio"]]
    for (ds, method) in sorted(pooled):
        series = [r["outlier_ratios"] for r in pooled[(ds, method)]
                  if r.get("outlier_ratios") is not None]
        if not series:
            continue
        means = np.mean(np.asarray(series), axis=0)
        for i, value in enumerate(means, start=1):
            rows.append([ds, method, str(i), f"{float(value):.6f}"])
    return rows


def rows_to_csv(rows: list[list[str]]) -> str:
    return "\n".join(",".join(row) for row in rows) + "\n"
