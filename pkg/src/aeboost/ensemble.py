"""Adaptive boosting loop for autoencoder ensembles.

A sequence of autoencoders is trained where each component's training set is
drawn, with replacement, from the original data using probabilities inversely
proportional to the previous component's reconstruction errors. Training thus
drifts toward inliers, components see different outlier subsets, and the
final score of a point is an error-weighted consensus across all components
after the first (the first one, trained on the raw data, is used only to
seed the resampling).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .autoencoder import (ArchitectureSpec, AutoencoderModel, TrainConfig,
                          build_autoencoder, layer_sizes, reconstruction_errors, train)
from .exceptions import ConfigurationError, DataError
from .seeding import iteration_rng, splitmix64

# reconstruction errors are floored here before any inversion, so perfectly
# reconstructed points cannot produce a division by zero
ERROR_FLOOR = 1e-12


def sampling_distribution(errors: np.ndarray) -> np.ndarray:
    """Selection probabilities proportional to inverse reconstruction error.

    Low-error (inlier-looking) points get high probability; the result sums
    to one. Errors are floored at ``ERROR_FLOOR`` before inversion.
    """
    errors = np.asarray(errors, dtype=np.float64)
    if errors.size == 0:
        raise DataError("cannot build a sampling distribution from zero errors")
    if not np.all(np.isfinite(errors)) or np.any(errors < 0):
        raise DataError("reconstruction errors must be finite and non-negative")
    inverse = 1.0 / np.maximum(errors, ERROR_FLOOR)
    return inverse / inverse.sum()


def resample(distribution: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Draw ``len(distribution)`` row indices i.i.d. with replacement."""
    distribution = np.asarray(distribution, dtype=np.float64)
    n = distribution.size
    return rng.choice(n, size=n, replace=True, p=distribution)


def consensus_weights(sample_error_sums: np.ndarray) -> np.ndarray:
    """Component weights proportional to inverse training-sample error sum.

    The component that reconstructed its own training sample best carries the
    most weight; weights are normalized to sum to one.
    """
    sums = np.asarray(sample_error_sums, dtype=np.float64)
    if sums.size < 1:
        raise ConfigurationError("consensus needs at least one component after the initial one")
    if not np.all(np.isfinite(sums)) or np.any(sums < 0):
        raise DataError("sample error sums must be finite and non-negative")
    inverse = 1.0 / np.maximum(sums, ERROR_FLOOR)
    return inverse / inverse.sum()


@dataclass
class Component:
    """One trained ensemble member and everything recorded about it."""

    model: AutoencoderModel | None
    sample_indices: np.ndarray   # rows of the original data it was trained on
    errors: np.ndarray           # its reconstruction errors over the original data
    sample_error_sum: float      # sum of its errors over its own training sample
    loss_trace: list[float] = field(default_factory=list)


@dataclass
class EnsembleState:
    """Ordered components plus the consensus weights for components 1..m-1."""

    components: list[Component]
    weights: np.ndarray

    @property
    def ensemble_size(self) -> int:
        return len(self.components)

    def scored_components(self) -> list[Component]:
        """The components that contribute to the consensus (all but the first)."""
        return self.components[1:]


def consensus_scores(state: EnsembleState) -> np.ndarray:
    """Final per-instance outlier scores: weighted sum of component errors.

    The first component is excluded by construction; its errors only shaped
    the first resampling.
    """
    scored = state.scored_components()
    if len(scored) != len(state.weights):
        raise ValueError(
            f"internal error: {len(scored)} scored components vs {len(state.weights)} weights")
    n = scored[0].errors.shape[0]
    scores = np.zeros(n)
    for weight, component in zip(state.weights, scored):
        if component.errors.shape[0] != n:
            raise ValueError("internal error: component error vectors disagree on length")
        scores += weight * component.errors
    return scores


@dataclass
class BoostingResult:
    """Everything produced by one boosting run."""

    state: EnsembleState
    scores: np.ndarray
    diagnostics: list[dict]
    seed: int
    depth: int

    @property
    def sampled_sets(self) -> list[np.ndarray]:
        """Index lists of the datasets drawn at each iteration (m lists)."""
        return [d["next_sample_indices"] for d in self.diagnostics]


def _validate_data(data: np.ndarray) -> np.ndarray:
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise DataError(f"expected a non-empty 2-D data matrix, got shape {data.shape}")
    if not np.all(np.isfinite(data)):
        raise DataError("data contains NaN or Inf")
    if data.min() < -1e-9 or data.max() > 1.0 + 1e-9:
        raise DataError(
            "data must be scaled to [0, 1] before boosting; "
            f"found values in [{data.min():.6g}, {data.max():.6g}]")
    return data


def run_boosting(data: np.ndarray, ensemble_size: int, depth: int,
                 train_config: TrainConfig | None = None, *,
                 seed: int = 0, alpha: float = 0.5, min_width: int = 3) -> BoostingResult:
    """Run the full boosting loop and consensus on ``data``.

    Per iteration i: train an autoencoder on the i-th sample (the original
    data for i=0), compute its reconstruction errors over all original rows,
    convert them to an inverse-error sampling distribution, and draw the next
    sample from the original data. After ``ensemble_size`` iterations the
    components after the first are combined into consensus scores with
    weights inverse to each component's own training-sample error sum.

    Every iteration gets an independent random stream derived from ``seed``,
    so results are reproducible and unaffected by changing ``ensemble_size``.
    """
    if ensemble_size < 2:
        raise ConfigurationError(
            f"ensemble_size must be >= 2 (consensus discards the first component), "
            f"got {ensemble_size}")
    data = _validate_data(data)
    if train_config is None:
        train_config = TrainConfig()

    n = data.shape[0]
    spec = ArchitectureSpec(data.shape[1], depth, alpha=alpha, min_width=min_width)
    components: list[Component] = []
    diagnostics: list[dict] = []
    sample_indices = np.arange(n)  # iteration 0 trains on the original data

    for i in range(ensemble_size):
        rng = iteration_rng(seed, i)
        model = build_autoencoder(spec, rng)
        trace = train(model, data[sample_indices], train_config, rng)
        errors = reconstruction_errors(model, data)
        sample_error_sum = float(errors[sample_indices].sum())
        next_indices = resample(sampling_distribution(errors), rng)
        components.append(Component(model, sample_indices, errors, sample_error_sum, trace))
        diagnostics.append({
            "iteration": i,
            "sample_indices": sample_indices,
            "sample_error_sum": sample_error_sum,
            "epochs_run": len(trace),
            "final_loss": trace[-1],
            "next_sample_indices": next_indices,
        })
        sample_indices = next_indices

    weights = consensus_weights(np.array([c.sample_error_sum for c in components[1:]]))
    state = EnsembleState(components=components, weights=weights)
    return BoostingResult(state=state, scores=consensus_scores(state),
                          diagnostics=diagnostics, seed=seed, depth=depth)


def depth_objective(state: EnsembleState) -> float:
    """Mean over scored components of their training-sample error sums."""
    return float(np.mean([c.sample_error_sum for c in state.scored_components()]))


@dataclass
class DepthSelection:
    chosen_depth: int
    objectives: dict[int, float]   # candidate depth -> average sample error
    best: BoostingResult


def choose_depth(objectives: dict[int, float]) -> int:
    """Argmin over candidate depths; ties go to the smallest depth."""
    if not objectives:
        raise ConfigurationError("depth selection needs at least one candidate")
    return min(sorted(objectives), key=lambda d: objectives[d])


def selection_from_results(results: dict[int, BoostingResult]) -> DepthSelection:
    """Assemble a DepthSelection from already-computed per-depth runs."""
    objectives = {depth: depth_objective(result.state) for depth, result in results.items()}
    chosen = choose_depth(objectives)
    return DepthSelection(chosen_depth=chosen, objectives=objectives, best=results[chosen])


def select_depth(data: np.ndarray, ensemble_size: int, depth_candidates,
                 train_config: TrainConfig | None = None, *,
                 seed: int = 0, alpha: float = 0.5, min_width: int = 3) -> DepthSelection:
    """Boost once per candidate depth and keep the depth with the lowest
    average training-sample reconstruction error.

    Each candidate runs on its own random stream derived from ``seed``, so
    candidates are independent and may be evaluated in any order (or in
    parallel) without changing the outcome.
    """
    candidates = sorted(set(int(d) for d in depth_candidates))
    if not candidates:
        raise ConfigurationError("depth selection needs at least one candidate")
    results = {
        depth: run_boosting(data, ensemble_size, depth, train_config,
                            seed=splitmix64(seed, depth), alpha=alpha, min_width=min_width)
        for depth in candidates
    }
    return selection_from_results(results)


def run_manifest(result: BoostingResult, ensemble_size: int,
                 train_config: TrainConfig, *, alpha: float = 0.5,
                 include_sample_indices: bool = False) -> dict:
    """JSON-ready record of one boosting run for reports and reproduction."""
    iterations = []
    for diag in result.diagnostics:
        entry = {
            "iteration": diag["iteration"],
            "sample_size": int(len(diag["sample_indices"])),
            "sample_error_sum": diag["sample_error_sum"],
            "epochs_run": diag["epochs_run"],
            "final_loss": diag["final_loss"],
        }
        if include_sample_indices:
            entry["sample_indices"] = [int(v) for v in diag["sample_indices"]]
            entry["next_sample_indices"] = [int(v) for v in diag["next_sample_indices"]]
        iterations.append(entry)
    first = result.state.components[0]
    return {
        "seed": int(result.seed),
        "ensemble_size": int(ensemble_size),
        "depth": int(result.depth),
        "alpha": alpha,
        "layer_sizes": layer_sizes(ArchitectureSpec(first.model.input_dim, result.depth,
                                                    alpha=alpha)) if first.model else None,
        "train_config": {
            "max_epochs": train_config.max_epochs,
            "convergence_tol": train_config.convergence_tol,
            "batch_size": train_config.batch_size,
            "learning_rate": train_config.learning_rate,
            "weight_decay": train_config.weight_decay,
        },
        "consensus_weights": [float(w) for w in result.state.weights],
        "iterations": iterations,
    }
