"""Scikit-learn style estimators wrapping the boosting core.

Both estimators follow the unsupervised-detector convention: ``fit(X)``
learns from unlabeled data and exposes ``decision_scores_`` for the training
rows; ``decision_function(X)`` scores arbitrary rows. Higher score = more
outlying. Hyperparameter defaults are the package-wide standard setup.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.utils.validation import check_array

from .autoencoder import (ArchitectureSpec, TrainConfig, build_autoencoder,
                          reconstruction_errors, train)
from .ensemble import run_boosting, select_depth
from .seeding import iteration_rng


class BoostedAutoencoderEnsemble(BaseEstimator):
    """Boosted autoencoder ensemble for unsupervised outlier detection.

    Trains ``ensemble_size`` autoencoders in sequence, resampling the
    training set between iterations with probability inversely proportional
    to the current reconstruction errors, then scores every instance as an
    error-weighted consensus of all components after the first. The network
    depth is chosen from ``depths`` by minimizing the average
    training-sample reconstruction error.

    Parameters
    ----------
    ensemble_size : int, default=20
        Number of boosting iterations (trained components). Must be >= 2.
    depths : tuple of int, default=(3, 5, 7, 9)
        Candidate total layer counts (odd, input and output included).
    alpha : float, default=0.5
        Per-layer width shrink factor of the encoder.
    epochs : int, default=50
        Maximum training epochs per component.
    convergence_tol : float, default=1e-4
        Early stop once consecutive epoch-average losses differ by less.
    batch_size : int, default=32
        Mini-batch size (capped at the sample size).
    learning_rate : float, default=1e-3
    weight_decay : float, default=1e-5
        Adam step size and coupled L2 penalty.
    random_state : int, default=0
        Master seed; every result is reproducible from it.

    Attributes
    ----------
    decision_scores_ : ndarray of shape (n_samples,)
        Consensus outlier scores of the training rows.
    depth_ : int
        Selected depth.
    depth_errors_ : dict
        Candidate depth -> average training-sample reconstruction error.
    ensemble_ : EnsembleState
        Trained components and consensus weights.
    diagnostics_ : list of dict
        Per-iteration sample index lists and error sums.
    """

    def __init__(self, ensemble_size=20, depths=(3, 5, 7, 9), alpha=0.5,
                 epochs=50, convergence_tol=1e-4, batch_size=32,
                 learning_rate=1e-3, weight_decay=1e-5, random_state=0):
        self.ensemble_size = ensemble_size
        self.depths = depths
        self.alpha = alpha
        self.epochs = epochs
        self.convergence_tol = convergence_tol
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.random_state = random_state

    def _train_config(self) -> TrainConfig:
        return TrainConfig(max_epochs=self.epochs, convergence_tol=self.convergence_tol,
                           batch_size=self.batch_size, learning_rate=self.learning_rate,
                           weight_decay=self.weight_decay, seed=self.random_state)

    def fit(self, X, y=None):
        """Fit the ensemble on ``X`` (features scaled to [0, 1]); ignores y."""
        X = check_array(X, dtype=np.float64)
        selection = select_depth(X, self.ensemble_size, self.depths,
                                 self._train_config(), seed=self.random_state,
                                 alpha=self.alpha)
        self.n_features_in_ = X.shape[1]
        self.depth_ = selection.chosen_depth
        self.depth_errors_ = selection.objectives
        self.ensemble_ = selection.best.state
        self.diagnostics_ = selection.best.diagnostics
        self.decision_scores_ = selection.best.scores
        return self

    def decision_function(self, X) -> np.ndarray:
        """Consensus outlier scores for arbitrary rows (higher = more outlying)."""
        if not hasattr(self, "ensemble_"):
            raise NotFittedError("fit the ensemble before scoring")
        X = check_array(X, dtype=np.float64)
        scores = np.zeros(X.shape[0])
        for weight, component in zip(self.ensemble_.weights,
                                     self.ensemble_.scored_components()):
            scores += weight * reconstruction_errors(component.model, X)
        return scores


class SingleAutoencoderBaseline(BaseEstimator):
    """One autoencoder trained on the full data; scores are its own
    reconstruction errors. The reference point the ensemble is measured
    against, sharing the exact network structure and training setup.

    Parameters mirror :class:`BoostedAutoencoderEnsemble` except that the
    depth is fixed (default 9) rather than selected.
    """

    def __init__(self, depth=9, alpha=0.5, epochs=50, convergence_tol=1e-4,
                 batch_size=32, learning_rate=1e-3, weight_decay=1e-5,
                 random_state=0):
        self.depth = depth
        self.alpha = alpha
        self.epochs = epochs
        self.convergence_tol = convergence_tol
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.random_state = random_state

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64)
        config = TrainConfig(max_epochs=self.epochs, convergence_tol=self.convergence_tol,
                             batch_size=self.batch_size, learning_rate=self.learning_rate,
                             weight_decay=self.weight_decay, seed=self.random_state)
        rng = iteration_rng(self.random_state, 0)
        model = build_autoencoder(
            ArchitectureSpec(X.shape[1], self.depth, alpha=self.alpha), rng)
        self.loss_trace_ = train(model, X, config, rng)
        self.model_ = model
        self.n_features_in_ = X.shape[1]
        self.decision_scores_ = reconstruction_errors(model, X)
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "model_"):
            raise NotFittedError("fit the baseline before scoring")
        X = check_array(X, dtype=np.float64)
        return reconstruction_errors(self.model_, X)
