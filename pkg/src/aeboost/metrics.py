"""Evaluation suite: average precision, rank correlation, ensemble diversity.

Labels mark outliers with 1 and are used for evaluation only; nothing in the
training path ever sees them. Rankings are total orders: descending score,
ties broken by ascending instance index, so every rank statistic here is
deterministic.
"""

from __future__ import annotations

import numpy as np

from .ensemble import EnsembleState
from .exceptions import DataError, MetricUndefinedError


def _check_labels(labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise DataError(f"labels must be 1-D, got shape {labels.shape}")
    if not np.all(np.isin(labels, (0, 1))):
        raise DataError("labels must be binary 0/1 flags")
    return labels.astype(np.int64)


def ranking_from_scores(scores: np.ndarray) -> np.ndarray:
    """Instance indices ordered by descending score, ties by ascending index."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1:
        raise DataError(f"scores must be 1-D, got shape {scores.shape}")
    return np.argsort(-scores, kind="stable")


def average_precision(scores: np.ndarray, labels: np.ndarray) -> float:
    """Area under the precision-recall curve (un-interpolated average precision).

    Mean of precision@k over the ranks k at which true outliers sit, using
    the deterministic ranking order. Undefined when labels are all one class.
    """
    scores = np.asarray(scores, dtype=np.float64)
    labels = _check_labels(labels)
    if scores.shape != labels.shape:
        raise DataError(f"scores and labels lengths differ: {scores.shape} vs {labels.shape}")
    n_pos = int(labels.sum())
    if n_pos == 0 or n_pos == labels.size:
        raise MetricUndefinedError(
            "average precision needs at least one outlier and one inlier label")
    ranked = labels[ranking_from_scores(scores)]
    hits = np.cumsum(ranked)
    ranks = np.arange(1, labels.size + 1)
    return float(np.mean(hits[ranked == 1] / ranks[ranked == 1]))


def _count_inversions(seq: list[int]) -> tuple[list[int], int]:
    # merge sort, counting how many pairs arrive out of order
    n = len(seq)
    if n < 2:
        return seq, 0
    left, inv_l = _count_inversions(seq[: n // 2])
    right, inv_r = _count_inversions(seq[n // 2:])
    merged, count, i, j = [], inv_l + inv_r, 0, 0
    while i < len(left) and j < len(right):
        if left[i] <= right[j]:
            merged.append(left[i])
            i += 1
        else:
            merged.append(right[j])
            j += 1
            count += len(left) - i
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, count


def kendall_tau(ranking_a: np.ndarray, ranking_b: np.ndarray) -> float:
    """Kendall tau-a between two total rankings of the same instances.

    (concordant - discordant) / (n choose 2) over all instance pairs. The
    rankings must be permutations of the same index set.
    """
    a = np.asarray(ranking_a)
    b = np.asarray(ranking_b)
    n = a.size
    if n < 2:
        raise MetricUndefinedError("rank correlation needs at least two instances")
    if b.size != n or not np.array_equal(np.sort(a), np.arange(n)) \
            or not np.array_equal(np.sort(b), np.arange(n)):
        raise DataError("rankings must be permutations of the same index set 0..n-1")
    position_in_b = np.empty(n, dtype=np.int64)
    position_in_b[b] = np.arange(n)
    # walk a in rank order; discordant pairs are exactly the inversions of
    # the corresponding positions in b
    _, discordant = _count_inversions([int(position_in_b[item]) for item in a])
    total = n * (n - 1) // 2
    return (total - 2 * discordant) / total


def ensemble_diversity(rankings: list[np.ndarray]) -> float:
    """One minus the mean pairwise rank correlation across components.

    0 means all components rank identically; 2 is a perfectly anti-correlated
    pair. Needs at least two rankings.
    """
    r = len(rankings)
    if r < 2:
        raise MetricUndefinedError("diversity needs at least two component rankings")
    tau_sum = 0.0
    for i in range(r - 1):
        for j in range(i + 1, r):
            tau_sum += kendall_tau(rankings[i], rankings[j])
    return 1.0 - 2.0 * tau_sum / (r * (r - 1))


def outlier_ratio(sample_indices: np.ndarray, labels: np.ndarray) -> float:
    """Fraction of drawn rows that are outliers, duplicates counted."""
    labels = _check_labels(labels)
    indices = np.asarray(sample_indices, dtype=np.int64)
    if indices.size == 0:
        raise DataError("empty sample")
    if indices.min() < 0 or indices.max() >= labels.size:
        raise DataError("sample indices out of range for labels")
    return float(labels[indices].mean())


def component_rankings(state: EnsembleState) -> list[np.ndarray]:
    """Outlier rankings of each scored component's own error vector."""
    return [ranking_from_scores(c.errors) for c in state.scored_components()]


def per_component_ap(state: EnsembleState, labels: np.ndarray) -> np.ndarray:
    """Average precision of each scored component, in ensemble order."""
    return np.array([average_precision(c.errors, labels)
                     for c in state.scored_components()])
