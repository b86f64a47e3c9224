"""Feedforward net (ReLU hidden layers, sigmoid output) trained with Adam.

Defaults follow the production setup: hidden sizes (256, 128), dropout
0.2 on hidden activations during training only, learning rate 1e-3,
batch size 64, up to 20 epochs, early stopping on a stratified 10%
validation split with patience 3.  Pure NumPy; everything is seeded.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._common import (
    TrainingError,
    check_binary_targets,
    logistic_loss,
    make_rng,
    sigmoid,
    stratified_holdout,
)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8


@dataclass
class FFNNModel:
    weights: list[np.ndarray]  # weights[l]: (fan_in, fan_out)
    biases: list[np.ndarray]
    dropout_rate: float = 0.2
    train_history: list[float] = field(default_factory=list, repr=False, compare=False)
    valid_history: list[float] = field(default_factory=list, repr=False, compare=False)
    best_epoch: int = -1

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def dim(self) -> int:
        return self.weights[0].shape[0]

    def logits(self, X: np.ndarray) -> np.ndarray:
        """Dropout-free deterministic forward pass up to the output logit."""
        h = np.asarray(X, dtype=np.float64)
        if h.shape[1] != self.dim:
            raise ValueError(f"model dim {self.dim}, data dim {h.shape[1]}")
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.maximum(h @ w + b, 0.0)
        return (h @ self.weights[-1] + self.biases[-1]).ravel()

    def scores(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.logits(X))


def init_params(
    layer_sizes: list[int], rng: np.random.Generator
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    weights, biases = [], []
    n_layers = len(layer_sizes) - 1
    for layer, (fan_in, fan_out) in enumerate(zip(layer_sizes[:-1], layer_sizes[1:])):
        # He init for the ReLU stack; the final sigmoid layer gets Xavier.
        scale = np.sqrt(2.0 / fan_in) if layer < n_layers - 1 else np.sqrt(1.0 / fan_in)
        weights.append(rng.standard_normal((fan_in, fan_out)) * scale)
        biases.append(np.zeros(fan_out))
    return weights, biases


def _forward(weights, biases, X, dropout_rate=0.0, rng=None):
    """Forward pass caching pre-activations; returns (logits, cache)."""
    activations = [X]
    masks = []
    h = X
    for w, b in zip(weights[:-1], biases[:-1]):
        h = np.maximum(h @ w + b, 0.0)
        if dropout_rate > 0.0 and rng is not None:
            mask = (rng.random(h.shape) >= dropout_rate) / (1.0 - dropout_rate)
            h = h * mask
            masks.append(mask)
        else:
            masks.append(None)
        activations.append(h)
    z = (h @ weights[-1] + biases[-1]).ravel()
    return z, (activations, masks)


def _backward(weights, cache, z, y):
    """Gradients of mean logistic loss wrt every weight and bias."""
    activations, masks = cache
    n = y.shape[0]
    delta = ((sigmoid(z) - y) / n)[:, None]  # dL/dz at the output
    grads_w = [None] * len(weights)
    grads_b = [None] * len(weights)
    grads_w[-1] = activations[-1].T @ delta
    grads_b[-1] = delta.sum(axis=0)
    upstream = delta @ weights[-1].T
    for layer in range(len(weights) - 2, -1, -1):
        if masks[layer] is not None:
            upstream = upstream * masks[layer]
        upstream = upstream * (activations[layer + 1] > 0)
        grads_w[layer] = activations[layer].T @ upstream
        grads_b[layer] = upstream.sum(axis=0)
        if layer > 0:
            upstream = upstream @ weights[layer].T
    return grads_w, grads_b


def loss_and_gradients(model: FFNNModel, X: np.ndarray, y: np.ndarray):
    """Dropout-free loss and full gradient list, for gradient checking."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    z, cache = _forward(model.weights, model.biases, X)
    grads_w, grads_b = _backward(model.weights, cache, z, y)
    return logistic_loss(z, y), grads_w, grads_b


def train_ffnn(
    X: np.ndarray,
    y: np.ndarray,
    lr: float = 1e-3,
    batch: int = 64,
    max_epochs: int = 20,
    hidden: tuple[int, ...] = (256, 128),
    dropout: float = 0.2,
    patience: int = 3,
    val_fraction: float = 0.1,
    seed: int = 42,
) -> FFNNModel:
    """Train with Adam, keeping the parameters of the best validation epoch.

    ``val_fraction=0`` disables the holdout and early stopping (useful for
    capacity/overfit checks); the final-epoch parameters are returned.
    """
    X = np.asarray(X, dtype=np.float64)
    y = check_binary_targets(y)
    rng = make_rng(seed)

    if val_fraction > 0.0:
        train_idx, valid_idx = stratified_holdout(y, val_fraction, seed)
        X_tr, y_tr = X[train_idx], y[train_idx]
        X_va, y_va = X[valid_idx], y[valid_idx]
    else:
        X_tr, y_tr = X, y
        X_va = y_va = None

    layer_sizes = [X.shape[1], *hidden, 1]
    weights, biases = init_params(layer_sizes, rng)
    m_w = [np.zeros_like(w) for w in weights]
    v_w = [np.zeros_like(w) for w in weights]
    m_b = [np.zeros_like(b) for b in biases]
    v_b = [np.zeros_like(b) for b in biases]

    model = FFNNModel([w.copy() for w in weights], [b.copy() for b in biases], dropout)
    best_valid = np.inf
    since_best = 0
    t = 0
    n = X_tr.shape[0]
    for epoch in range(1, max_epochs + 1):
        order = rng.permutation(n)
        for start in range(0, n, batch):
            rows = order[start : start + batch]
            z, cache = _forward(weights, biases, X_tr[rows], dropout, rng)
            grads_w, grads_b = _backward(weights, cache, z, y_tr[rows])
            t += 1
            bias_c1 = 1.0 - ADAM_BETA1**t
            bias_c2 = 1.0 - ADAM_BETA2**t
            for layer in range(len(weights)):
                for p, g, m, v in (
                    (weights[layer], grads_w[layer], m_w[layer], v_w[layer]),
                    (biases[layer], grads_b[layer], m_b[layer], v_b[layer]),
                ):
                    m *= ADAM_BETA1
                    m += (1 - ADAM_BETA1) * g
                    v *= ADAM_BETA2
                    v += (1 - ADAM_BETA2) * g * g
                    p -= lr * (m / bias_c1) / (np.sqrt(v / bias_c2) + ADAM_EPS)

        z_tr, _ = _forward(weights, biases, X_tr)
        train_loss = logistic_loss(z_tr, y_tr)
        if not np.isfinite(train_loss):
            raise TrainingError(f"non-finite training loss at epoch {epoch}")
        model.train_history.append(train_loss)

        if X_va is None:
            model.best_epoch = epoch
            continue
        z_va, _ = _forward(weights, biases, X_va)
        valid_loss = logistic_loss(z_va, y_va)
        if not np.isfinite(valid_loss):
            raise TrainingError(f"non-finite validation loss at epoch {epoch}")
        model.valid_history.append(valid_loss)
        if valid_loss < best_valid - 1e-12:
            best_valid = valid_loss
            since_best = 0
            model.weights = [w.copy() for w in weights]
            model.biases = [b.copy() for b in biases]
            model.best_epoch = epoch
        else:
            since_best += 1
            if since_best >= patience:
                break

    if X_va is None:
        model.weights = [w.copy() for w in weights]
        model.biases = [b.copy() for b in biases]
    return model
