"""Symmetric shrinking autoencoders: architecture, training, reconstruction errors.

Layer widths follow a halving recurrence on the encoder side (floor of
``alpha`` times the previous width, clamped below at ``min_width`` neurons so
the bottleneck never over-compresses) and mirror on the decoder side. The
first hidden layer and the output layer are sigmoid, everything in between is
ReLU. Training is plain mini-batch Adam with an early stop once the epoch
average reconstruction error stops moving.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import nn
from .exceptions import ConfigurationError, DataError

MODEL_FORMAT = "aeboost-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class ArchitectureSpec:
    """Shape of a symmetric autoencoder.

    ``depth`` counts every layer including input and output, so it must be
    odd: (depth-1)/2 encoder transitions, one bottleneck in the middle, and a
    mirrored decoder.
    """

    input_dim: int
    depth: int
    alpha: float = 0.5
    min_width: int = 3

    def __post_init__(self):
        if self.input_dim < 1:
            raise ConfigurationError(f"input_dim must be >= 1, got {self.input_dim}")
        if self.depth < 3 or self.depth % 2 == 0:
            raise ConfigurationError(f"depth must be an odd integer >= 3, got {self.depth}")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigurationError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.min_width < 1:
            raise ConfigurationError(f"min_width must be >= 1, got {self.min_width}")


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; defaults are the package-wide standard setup."""

    max_epochs: int = 50
    convergence_tol: float = 1e-4
    batch_size: int = 32
    learning_rate: float = 1e-3
    weight_decay: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ConfigurationError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not self.convergence_tol > 0:
            raise ConfigurationError(f"convergence_tol must be > 0, got {self.convergence_tol}")
        if self.batch_size < 1:
            raise ConfigurationError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass
class AutoencoderModel:
    layers: list[nn.DenseLayer]

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def sizes(self) -> list[int]:
        return [self.layers[0].in_dim] + [layer.out_dim for layer in self.layers]

    @property
    def activations(self) -> list[str]:
        return [layer.activation.value for layer in self.layers]

    def reconstruct(self, x: np.ndarray) -> np.ndarray:
        return nn.forward(self.layers, x)


def layer_sizes(spec: ArchitectureSpec) -> list[int]:
    """Widths of all ``spec.depth`` layers, input and output included.

    Encoder widths shrink by ``floor(alpha * previous)`` with the
    ``min_width`` clamp applied at every step; the decoder mirrors the
    encoder, so the result is a palindrome starting and ending at
    ``input_dim``.
    """
    encoder = [spec.input_dim]
    for _ in range((spec.depth - 1) // 2):
        nxt = int(np.floor(spec.alpha * encoder[-1]))
        encoder.append(max(nxt, spec.min_width))
    return encoder + encoder[-2::-1]


def build_autoencoder(spec: ArchitectureSpec, rng: np.random.Generator) -> AutoencoderModel:
    """Glorot-initialized autoencoder with the sigmoid/ReLU placement rule.

    The first hidden layer and the output layer are sigmoid; every other
    layer is ReLU (for depth 3 both layers end up sigmoid).
    """
    sizes = layer_sizes(spec)
    n_weight_layers = len(sizes) - 1
    layers = []
    for k in range(n_weight_layers):
        if k == 0 or k == n_weight_layers - 1:
            act = nn.Activation.SIGMOID
        else:
            act = nn.Activation.RELU
        layers.append(nn.glorot_layer(sizes[k], sizes[k + 1], act, rng))
    return AutoencoderModel(layers=layers)


def should_stop(loss_trace: list[float], tol: float) -> bool:
    """Early-stop rule: two epochs run and the last two averages differ < tol."""
    return len(loss_trace) >= 2 and abs(loss_trace[-1] - loss_trace[-2]) < tol


def train(model: AutoencoderModel, data: np.ndarray, config: TrainConfig,
          rng: np.random.Generator | None = None) -> list[float]:
    """Train ``model`` in place to reconstruct ``data``; returns the loss trace.

    One trace entry per executed epoch: the mean over all rows of the
    per-row squared-L2 reconstruction loss observed during that epoch.
    Stops after ``max_epochs`` epochs, or earlier as soon as two consecutive
    epoch averages differ by less than ``convergence_tol``. Rows are
    reshuffled every epoch from ``rng`` (falls back to a generator seeded
    with ``config.seed``).
    """
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] < 1:
        raise DataError(f"training data must be a non-empty 2-D array, got shape {data.shape}")
    if data.shape[1] != model.input_dim:
        raise ConfigurationError(
            f"data has {data.shape[1]} features but model expects {model.input_dim}")
    if rng is None:
        rng = np.random.default_rng(config.seed)

    n = data.shape[0]
    batch_size = min(config.batch_size, n)
    params = nn.layer_params(model.layers)
    opt = nn.AdamState(learning_rate=config.learning_rate, weight_decay=config.weight_decay)

    trace: list[float] = []
    for _ in range(config.max_epochs):
        order = rng.permutation(n)
        loss_sum = 0.0
        for start in range(0, n, batch_size):
            batch = data[order[start:start + batch_size]]
            loss, grads = nn.loss_and_grads(model.layers, batch, batch)
            loss_sum += loss * batch.shape[0]
            nn.adam_step(params, nn.flatten_grads(grads), opt)
        trace.append(loss_sum / n)
        if should_stop(trace, config.convergence_tol):
            break
    return trace


def reconstruction_errors(model: AutoencoderModel, data: np.ndarray) -> np.ndarray:
    """Per-row squared L2 distance between each row and its reconstruction."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2:
        raise DataError(f"expected a 2-D data matrix, got shape {data.shape}")
    if data.shape[1] != model.input_dim:
        raise ConfigurationError(
            f"data has {data.shape[1]} features but model expects {model.input_dim}")
    diff = data - model.reconstruct(data)
    return np.sum(diff * diff, axis=1)


def save_model(model: AutoencoderModel, path: str | Path) -> None:
    """Write the model as versioned JSON (sizes, activations, parameters)."""
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "sizes": model.sizes,
        "activations": model.activations,
        "weights": [layer.weights.ravel().tolist() for layer in model.layers],
        "biases": [layer.biases.tolist() for layer in model.layers],
    }
    Path(path).write_text(json.dumps(payload))


def load_model(path: str | Path) -> AutoencoderModel:
    payload = json.loads(Path(path).read_text())
    if payload.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a {MODEL_FORMAT} file")
    if payload.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model version {payload.get('version')}")
    sizes = payload["sizes"]
    layers = []
    for k, act in enumerate(payload["activations"]):
        weights = np.array(payload["weights"][k], dtype=np.float64).reshape(sizes[k], sizes[k + 1])
        biases = np.array(payload["biases"][k], dtype=np.float64)
        layers.append(nn.DenseLayer(weights, biases, nn.Activation(act)))
    return AutoencoderModel(layers=layers)
