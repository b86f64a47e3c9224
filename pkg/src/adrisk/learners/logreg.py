"""L2-regularized logistic regression via full-batch gradient descent.

The objective is mean logistic loss plus ``||w||^2 / (2 C n)`` (bias
unpenalized).  Steps use backtracking line search, so the training loss
is non-increasing by construction and the whole fit is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._common import TrainingError, check_binary_targets, logistic_loss, sigmoid


@dataclass
class LogRegModel:
    weights: np.ndarray
    bias: float
    C: float
    loss_history: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.dim:
            raise ValueError(f"model dim {self.dim}, data dim {X.shape[1]}")
        return sigmoid(X @ self.weights + self.bias)


def logreg_loss(w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float) -> float:
    n = X.shape[0]
    z = X @ w + b
    return logistic_loss(z, y) + float(w @ w) / (2.0 * C * n)


def logreg_gradient(
    w: np.ndarray, b: float, X: np.ndarray, y: np.ndarray, C: float
) -> tuple[np.ndarray, float]:
    """Analytic gradient of logreg_loss wrt (w, b)."""
    n = X.shape[0]
    p = sigmoid(X @ w + b)
    residual = p - y
    grad_w = X.T @ residual / n + w / (C * n)
    grad_b = float(np.mean(residual))
    return grad_w, grad_b


def train_logreg(
    X: np.ndarray,
    y: np.ndarray,
    C: float = 1.0,
    epochs: int = 500,
    lr: float = 1.0,
    tol: float = 1e-10,
) -> LogRegModel:
    X = np.asarray(X, dtype=np.float64)
    y = check_binary_targets(y)
    if X.shape[0] != y.shape[0]:
        raise ValueError("X and y row counts differ")
    if X.shape[0] < 2:
        raise TrainingError("need at least 2 training rows")
    if C <= 0:
        raise ValueError("C must be positive")

    w = np.zeros(X.shape[1])
    b = 0.0
    step = lr
    history = [logreg_loss(w, b, X, y, C)]
    for _ in range(epochs):
        grad_w, grad_b = logreg_gradient(w, b, X, y, C)
        grad_sq = float(grad_w @ grad_w) + grad_b * grad_b
        if grad_sq < tol * tol:
            break
        # Armijo backtracking: only accept steps with sufficient decrease.
        accepted = False
        t = step
        for _ in range(60):
            w_new = w - t * grad_w
            b_new = b - t * grad_b
            new_loss = logreg_loss(w_new, b_new, X, y, C)
            if new_loss <= history[-1] - 1e-4 * t * grad_sq:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        w, b = w_new, b_new
        history.append(new_loss)
        step = min(t * 2.0, 1e6)
        if history[-2] - history[-1] < tol:
            break
    return LogRegModel(weights=w, bias=b, C=C, loss_history=history)
