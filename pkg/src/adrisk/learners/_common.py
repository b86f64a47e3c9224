"""Shared numerics for the native learners."""

from __future__ import annotations

import numpy as np


class TrainingError(RuntimeError):
    pass


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def logistic_loss(z: np.ndarray, y: np.ndarray) -> float:
    """Mean binary cross-entropy computed from logits (stable)."""
    z = np.asarray(z, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def check_binary_targets(y: np.ndarray) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64).ravel()
    classes = np.unique(y)
    if not np.all(np.isin(classes, (0.0, 1.0))):
        raise ValueError("targets must be 0/1")
    if classes.size < 2:
        raise TrainingError("training data contains a single class")
    return y


def make_rng(seed: int) -> np.random.Generator:
    """The project-wide deterministic generator (PCG64)."""
    return np.random.Generator(np.random.PCG64(seed))


def stratified_holdout(
    y: np.ndarray, fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Index split (train, valid) with per-class proportions preserved."""
    rng = make_rng(seed)
    train_idx, valid_idx = [], []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        members = members[rng.permutation(members.size)]
        n_valid = int(round(members.size * fraction))
        n_valid = min(max(n_valid, 1), members.size - 1)
        valid_idx.append(members[:n_valid])
        train_idx.append(members[n_valid:])
    train = np.sort(np.concatenate(train_idx))
    valid = np.sort(np.concatenate(valid_idx))
    return train, valid
