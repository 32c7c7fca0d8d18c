"""Minimal deterministic dense-network engine.

Fully connected layers, sigmoid/ReLU activations, squared-error loss,
reverse-mode gradients and an Adam optimizer with L2 weight decay. All
arithmetic is float64 and driven by explicit numpy generators, so a run is
reproducible bit for bit from its seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .exceptions import ConfigurationError


class Activation(str, Enum):
    SIGMOID = "sigmoid"
    RELU = "relu"


@dataclass
class DenseLayer:
    """One fully connected layer: ``act(x @ weights + biases)``."""

    weights: np.ndarray  # (in_dim, out_dim)
    biases: np.ndarray   # (out_dim,)
    activation: Activation

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]


def glorot_layer(in_dim: int, out_dim: int, activation: Activation,
                 rng: np.random.Generator) -> DenseLayer:
    """Glorot-uniform weights, zero biases."""
    if in_dim < 1 or out_dim < 1:
        raise ConfigurationError(f"layer dims must be positive, got {in_dim}x{out_dim}")
    limit = np.sqrt(6.0 / (in_dim + out_dim))
    weights = rng.uniform(-limit, limit, size=(in_dim, out_dim))
    return DenseLayer(weights=weights, biases=np.zeros(out_dim), activation=Activation(activation))


def sigmoid(z: np.ndarray) -> np.ndarray:
    # two-branch form avoids overflow in exp for large |z|
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _apply(activation: Activation, z: np.ndarray) -> np.ndarray:
    if activation is Activation.SIGMOID:
        return sigmoid(z)
    return relu(z)


def _check_chain(layers: list[DenseLayer], input_dim: int) -> None:
    dim = input_dim
    for k, layer in enumerate(layers):
        if layer.in_dim != dim:
            raise ConfigurationError(
                f"layer {k} expects input of size {layer.in_dim}, got {dim}")
        dim = layer.out_dim


def _as_batch(x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        return x[None, :], True
    if x.ndim == 2:
        return x, False
    raise ConfigurationError(f"expected 1-D or 2-D input, got shape {x.shape}")


def forward(layers: list[DenseLayer], x: np.ndarray) -> np.ndarray:
    """Run the layer stack on a vector or a batch of row vectors."""
    batch, squeeze = _as_batch(x)
    _check_chain(layers, batch.shape[1])
    a = batch
    for layer in layers:
        a = _apply(layer.activation, a @ layer.weights + layer.biases)
    return a[0] if squeeze else a


def mse_loss(output: np.ndarray, target: np.ndarray) -> float:
    """Squared L2 distance between vectors; row-mean of the same for batches."""
    output = np.asarray(output, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if output.shape != target.shape:
        raise ConfigurationError(
            f"output shape {output.shape} != target shape {target.shape}")
    diff = output - target
    if diff.ndim == 1:
        return float(np.dot(diff, diff))
    return float(np.mean(np.sum(diff * diff, axis=1)))


def loss_and_grads(layers: list[DenseLayer], x: np.ndarray,
                   target: np.ndarray) -> tuple[float, list[tuple[np.ndarray, np.ndarray]]]:
    """Loss plus gradients of ``mse_loss(forward(layers, x), target)``.

    Returns the loss and one ``(d_weights, d_biases)`` pair per layer, shapes
    matching the layer parameters. Accepts a single vector or a batch of
    rows; for a batch the loss is the row mean, matching :func:`mse_loss`.
    """
    batch, _ = _as_batch(x)
    tgt, _ = _as_batch(target)
    _check_chain(layers, batch.shape[1])
    if tgt.shape != (batch.shape[0], layers[-1].out_dim):
        raise ConfigurationError(
            f"target shape {tgt.shape} incompatible with output dim {layers[-1].out_dim}")

    activations = [batch]
    for layer in layers:
        activations.append(_apply(layer.activation, activations[-1] @ layer.weights + layer.biases))

    n_rows = batch.shape[0]
    diff = activations[-1] - tgt
    loss = float(np.sum(diff * diff) / n_rows)
    grad_a = 2.0 * diff / n_rows
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(layers)  # type: ignore[list-item]
    for k in range(len(layers) - 1, -1, -1):
        layer, a_out = layers[k], activations[k + 1]
        if layer.activation is Activation.SIGMOID:
            delta = grad_a * a_out * (1.0 - a_out)
        else:
            delta = grad_a * (a_out > 0.0)
        grads[k] = (activations[k].T @ delta, delta.sum(axis=0))
        if k > 0:
            grad_a = delta @ layer.weights.T
    return loss, grads


def backward(layers: list[DenseLayer], x: np.ndarray,
             target: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """Gradients only; see :func:`loss_and_grads`."""
    return loss_and_grads(layers, x, target)[1]


@dataclass
class AdamState:
    """Adam optimizer state for a list of parameter arrays.

    ``learning_rate`` and ``weight_decay`` defaults match the training setup
    used everywhere in this package; beta/epsilon are the optimizer's
    canonical constants. Weight decay is coupled L2: the decay term is added
    to the gradient before the moment updates.
    """

    learning_rate: float = 1e-3
    weight_decay: float = 1e-5
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step_count: int = 0
    first_moment: list[np.ndarray] = field(default_factory=list)
    second_moment: list[np.ndarray] = field(default_factory=list)

    def _ensure_moments(self, params: list[np.ndarray]) -> None:
        if not self.first_moment:
            self.first_moment = [np.zeros_like(p) for p in params]
            self.second_moment = [np.zeros_like(p) for p in params]


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState) -> None:
    """One bias-corrected Adam update, applied to ``params`` in place."""
    if len(params) != len(grads):
        raise ConfigurationError("params and grads must align one to one")
    state._ensure_moments(params)
    state.step_count += 1
    t = state.step_count
    b1, b2 = state.beta1, state.beta2
    for p, g, m, v in zip(params, grads, state.first_moment, state.second_moment):
        if state.weight_decay != 0.0:
            g = g + state.weight_decay * p
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        p -= state.learning_rate * m_hat / (np.sqrt(v_hat) + state.epsilon)


def layer_params(layers: list[DenseLayer]) -> list[np.ndarray]:
    """Flat parameter list ``[W0, b0, W1, b1, ...]`` viewing the live arrays."""
    out: list[np.ndarray] = []
    for layer in layers:
        out.append(layer.weights)
        out.append(layer.biases)
    return out


def flatten_grads(grads: list[tuple[np.ndarray, np.ndarray]]) -> list[np.ndarray]:
    """Per-layer (dW, db) pairs -> flat list aligned with :func:`layer_params`."""
    out: list[np.ndarray] = []
    for d_w, d_b in grads:
        out.append(d_w)
        out.append(d_b)
    return out
