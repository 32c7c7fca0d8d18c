"""Dataset ingestion, min-max normalization and synthetic benchmarks.

Datasets are immutable value objects: every transformation returns a new
``Dataset`` and records what it did in ``provenance``. Features must be
scaled to [0, 1] before training (the reconstruction targets go through a
sigmoid output layer), which is what :func:`normalize_min_max` does.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exceptions import ConfigurationError, DataError

DATASET_FORMAT = "aeboost-dataset"
DATASET_VERSION = 1


@dataclass(frozen=True)
class Dataset:
    matrix: np.ndarray
    labels: np.ndarray | None = None
    feature_names: list[str] | None = None
    provenance: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def outlier_count(self) -> int:
        return int(self.labels.sum()) if self.labels is not None else 0

    @property
    def outlier_fraction(self) -> float:
        return self.outlier_count / self.n if self.n else 0.0


def _parse_cell(raw: str, line_no: int, col_name: str, path) -> float:
    text = raw.strip()
    if not text:
        raise DataError(f"{path}: line {line_no}, column {col_name}: missing value")
    try:
        return float(text)
    except ValueError:
        raise DataError(
            f"{path}: line {line_no}, column {col_name}: "
            f"could not parse {raw!r} as a number") from None


def load_csv(path: str | Path, label_column: str | int | None = None, *,
             has_header: bool = True, delimiter: str = ",") -> Dataset:
    """Parse a numeric CSV into a Dataset, optionally splitting off a label column.

    Labels must be 0/1 (1 marks an outlier). Missing values and non-numeric
    cells are rejected with the offending line and column named.
    """
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataError(f"cannot read dataset file: {exc}") from exc
    reader = csv.reader(lines, delimiter=delimiter)
    rows = [row for row in reader if row]
    if not rows:
        raise DataError(f"{path}: file contains no data")

    header: list[str] | None = None
    if has_header:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise DataError(f"{path}: file contains a header but no data rows")

    n_cols = len(rows[0])
    label_idx: int | None = None
    if label_column is not None:
        if isinstance(label_column, str):
            if header is None:
                raise DataError("label column given by name requires a header row")
            if label_column not in header:
                raise DataError(f"{path}: no column named {label_column!r} in header")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not 0 <= label_idx < n_cols:
                raise DataError(f"{path}: label column index {label_idx} out of range")

    def col_name(j: int) -> str:
        return repr(header[j]) if header else str(j + 1)

    matrix_rows: list[list[float]] = []
    labels: list[int] = []
    offset = 2 if has_header else 1  # 1-based file line of the first data row
    for r, row in enumerate(rows):
        line_no = r + offset
        if len(row) != n_cols:
            raise DataError(
                f"{path}: line {line_no}: expected {n_cols} fields, found {len(row)}")
        features = []
        for j, cell in enumerate(row):
            value = _parse_cell(cell, line_no, col_name(j), path)
            if j == label_idx:
                if value not in (0.0, 1.0):
                    raise DataError(
                        f"{path}: line {line_no}, column {col_name(j)}: "
                        f"label must be 0 or 1, got {cell.strip()!r}")
                labels.append(int(value))
            else:
                features.append(value)
        matrix_rows.append(features)

    feature_names = None
    if header is not None:
        feature_names = [h for j, h in enumerate(header) if j != label_idx]
    return Dataset(
        matrix=np.array(matrix_rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64) if label_idx is not None else None,
        feature_names=feature_names,
        provenance={"source": str(path)},
    )


def normalize_min_max(ds: Dataset) -> Dataset:
    """Scale every feature to [0, 1]; constant features map to 0.

    The per-feature min/max are recorded in provenance so any run can be
    traced back to the raw values. Idempotent: normalizing twice changes
    nothing.
    """
    if ds.n < 1:
        raise DataError("cannot normalize an empty dataset")
    mins = ds.matrix.min(axis=0)
    maxs = ds.matrix.max(axis=0)
    span = maxs - mins
    out = np.zeros_like(ds.matrix)
    moving = span > 0
    out[:, moving] = (ds.matrix[:, moving] - mins[moving]) / span[moving]
    provenance = dict(ds.provenance)
    provenance["normalization"] = {"min": mins.tolist(), "max": maxs.tolist()}
    return replace(ds, matrix=out, provenance=provenance)


def make_synthetic(n_inliers: int, n_outliers: int, dim: int, seed: int) -> Dataset:
    """Labeled benchmark: a Gaussian cluster squeezed into the middle of the
    unit box plus uniform box noise as outliers.

    Inliers are standard-normal draws min-max scaled into [0.25, 0.75] per
    dimension; outliers are uniform over [0, 1]^dim. Rows are shuffled, and
    everything is deterministic in ``seed``.
    """
    if n_inliers < 1 or n_outliers < 1 or dim < 1:
        raise ConfigurationError("n_inliers, n_outliers and dim must all be >= 1")
    rng = np.random.default_rng(seed)
    raw = rng.normal(size=(n_inliers, dim))
    lo, hi = raw.min(axis=0), raw.max(axis=0)
    span = hi - lo
    inliers = np.full_like(raw, 0.5)
    moving = span > 0
    inliers[:, moving] = 0.25 + 0.5 * (raw[:, moving] - lo[moving]) / span[moving]
    outliers = rng.uniform(0.0, 1.0, size=(n_outliers, dim))

    matrix = np.vstack([inliers, outliers])
    labels = np.concatenate([np.zeros(n_inliers, dtype=np.int64),
                             np.ones(n_outliers, dtype=np.int64)])
    order = rng.permutation(matrix.shape[0])
    return Dataset(
        matrix=matrix[order],
        labels=labels[order],
        feature_names=[f"f{j}" for j in range(dim)],
        provenance={"source": "synthetic", "seed": int(seed),
                    "n_inliers": int(n_inliers), "n_outliers": int(n_outliers)},
    )


def downsample_outliers(ds: Dataset, target_fraction: float, seed: int) -> Dataset:
    """Keep all inliers and a seeded uniform subset of outliers such that the
    outlier fraction lands on ``target_fraction`` within one instance.

    The retained count is round(f * n_inliers / (1 - f)); row order is
    preserved.
    """
    if ds.labels is None:
        raise DataError("downsampling outliers requires labels")
    current = ds.outlier_fraction
    if target_fraction > current + 1e-12:
        raise DataError(
            f"target fraction {target_fraction} exceeds current fraction {current:.6g}")
    n_inliers = ds.n - ds.outlier_count
    keep = int(round(target_fraction * n_inliers / (1.0 - target_fraction)))
    keep = min(keep, ds.outlier_count)
    provenance = dict(ds.provenance)
    provenance["downsampled"] = {"target_fraction": target_fraction,
                                 "kept_outliers": keep, "seed": int(seed)}
    if keep == ds.outlier_count:
        return replace(ds, provenance=provenance)

    rng = np.random.default_rng(seed)
    outlier_positions = np.flatnonzero(ds.labels == 1)
    chosen = rng.choice(outlier_positions, size=keep, replace=False)
    mask = ds.labels == 0
    mask[chosen] = True
    return replace(ds, matrix=ds.matrix[mask], labels=ds.labels[mask],
                   provenance=provenance)


def save_dataset(ds: Dataset, path: str | Path) -> None:
    """Write a dataset cache file: one JSON provenance header line, then CSV
    rows with full-precision floats (the matrix round-trips bit-exactly)."""
    header = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "feature_names": ds.feature_names,
        "has_labels": ds.labels is not None,
        "provenance": ds.provenance,
    }
    lines = ["# " + json.dumps(header)]
    for i in range(ds.n):
        cells = [repr(float(v)) for v in ds.matrix[i]]
        if ds.labels is not None:
            cells.append(str(int(ds.labels[i])))
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def load_dataset(path: str | Path) -> Dataset:
    path = Path(path)
    lines = path.read_text().splitlines()
    if not lines or not lines[0].startswith("# "):
        raise DataError(f"{path}: not a {DATASET_FORMAT} cache file")
    header = json.loads(lines[0][2:])
    if header.get("format") != DATASET_FORMAT:
        raise DataError(f"{path}: not a {DATASET_FORMAT} cache file")
    if header.get("version") != DATASET_VERSION:
        raise DataError(f"{path}: unsupported cache version {header.get('version')}")
    has_labels = header["has_labels"]
    matrix_rows, labels = [], []
    for line in lines[1:]:
        cells = line.split(",")
        if has_labels:
            labels.append(int(cells[-1]))
            cells = cells[:-1]
        matrix_rows.append([float(c) for c in cells])
    return Dataset(
        matrix=np.array(matrix_rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64) if has_labels else None,
        feature_names=header["feature_names"],
        provenance=header["provenance"],
    )


def save_labeled_csv(ds: Dataset, path: str | Path) -> None:
    """Plain CSV with a header and a trailing ``label`` column."""
    if ds.labels is None:
        raise DataError("dataset has no labels to write")
    names = ds.feature_names or [f"f{j}" for j in range(ds.dim)]
    lines = [",".join(names + ["label"])]
    for i in range(ds.n):
        cells = [repr(float(v)) for v in ds.matrix[i]] + [str(int(ds.labels[i]))]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")
