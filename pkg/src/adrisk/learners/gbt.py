"""Gradient-boosted trees with second-order logistic boosting.

Per round: g_i = p_i - y_i, h_i = p_i (1 - p_i); exact greedy splits
maximize 0.5 * [G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam)] and leaf
weights are -G/(H+lam).  Row and feature subsampling draw from a seeded
PCG64 stream, so fits are fully reproducible.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._common import TrainingError, check_binary_targets, logistic_loss, make_rng, sigmoid

# The hyperparameter search space used for the production runs.
DEFAULT_GRID = {
    "n_trees": [200, 400, 600],
    "max_depth": [4, 6, 8],
    "learning_rate": [0.05, 0.1],
    "subsample": [0.8, 1.0],
    "colsample": [0.8, 1.0],
}

MIN_GAIN = 1e-12


def leaf_weight(G: float, H: float, lam: float = 1.0) -> float:
    return -G / (H + lam)


def split_gain(GL: float, HL: float, GR: float, HR: float, lam: float = 1.0) -> float:
    G, H = GL + GR, HL + HR
    return 0.5 * (GL * GL / (HL + lam) + GR * GR / (HR + lam) - G * G / (H + lam))


@dataclass
class Tree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        idx = np.zeros(X.shape[0], dtype=np.int32)
        while True:
            feat = self.feature[idx]
            internal = feat >= 0
            if not internal.any():
                return self.value[idx]
            rows = np.flatnonzero(internal)
            node = idx[rows]
            go_left = X[rows, feat[rows]] < self.threshold[node]
            idx[rows] = np.where(go_left, self.left[node], self.right[node])

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


class _TreeBuilder:
    def __init__(self, X, g, h, features, max_depth, lam):
        self.X = X
        self.g = g
        self.h = h
        self.features = features
        self.max_depth = max_depth
        self.lam = lam
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.value = []

    def _new_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def build(self, rows: np.ndarray) -> int:
        return self._grow(rows, depth=0)

    def _grow(self, rows: np.ndarray, depth: int) -> int:
        node = self._new_node()
        G = float(self.g[rows].sum())
        H = float(self.h[rows].sum())
        if depth >= self.max_depth or rows.size < 2:
            self.value[node] = leaf_weight(G, H, self.lam)
            return node
        best = self._best_split(rows, G, H)
        if best is None:
            self.value[node] = leaf_weight(G, H, self.lam)
            return node
        feat, thr = best
        go_left = self.X[rows, feat] < thr
        left_rows = rows[go_left]
        right_rows = rows[~go_left]
        left_id = self._grow(left_rows, depth + 1)
        right_id = self._grow(right_rows, depth + 1)
        self.feature[node] = feat
        self.threshold[node] = thr
        self.left[node] = left_id
        self.right[node] = right_id
        return node

    def _best_split(self, rows, G, H):
        g = self.g[rows]
        h = self.h[rows]
        parent_score = G * G / (H + self.lam)
        best_gain = MIN_GAIN
        best = None
        for feat in self.features:
            x = self.X[rows, feat]
            order = np.argsort(x, kind="stable")
            xs = x[order]
            cum_g = np.cumsum(g[order])
            cum_h = np.cumsum(h[order])
            boundary = xs[:-1] != xs[1:]
            if not boundary.any():
                continue
            GL = cum_g[:-1]
            HL = cum_h[:-1]
            GR = G - GL
            HR = H - HL
            gains = 0.5 * (
                GL * GL / (HL + self.lam) + GR * GR / (HR + self.lam) - parent_score
            )
            mids = 0.5 * (xs[:-1] + xs[1:])
            # Guard against midpoints collapsing onto the left value.
            usable = boundary & (mids > xs[:-1])
            gains = np.where(usable, gains, -np.inf)
            pos = int(np.argmax(gains))
            if gains[pos] > best_gain:
                best_gain = float(gains[pos])
                best = (int(feat), float(mids[pos]))
        return best

    def finish(self) -> Tree:
        return Tree(
            feature=np.asarray(self.feature, dtype=np.int32),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.int32),
            right=np.asarray(self.right, dtype=np.int32),
            value=np.asarray(self.value, dtype=np.float64),
        )


@dataclass
class GBTModel:
    trees: list[Tree]
    learning_rate: float
    n_features: int
    lam: float = 1.0
    base_logit: float = 0.0
    params: dict = field(default_factory=dict)
    loss_history: list[float] = field(default_factory=list, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.n_features

    def logits(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1] != self.n_features:
            raise ValueError(f"model dim {self.n_features}, data dim {X.shape[1]}")
        F = np.full(X.shape[0], self.base_logit, dtype=np.float64)
        for tree in self.trees:
            F += self.learning_rate * tree.predict(X)
        return F

    def scores(self, X: np.ndarray) -> np.ndarray:
        return sigmoid(self.logits(X))


def fit_gbt(
    X: np.ndarray,
    y: np.ndarray,
    n_trees: int = 200,
    max_depth: int = 6,
    learning_rate: float = 0.1,
    subsample: float = 1.0,
    colsample: float = 1.0,
    lam: float = 1.0,
    seed: int = 42,
) -> GBTModel:
    """Fit one boosting configuration."""
    X = np.asarray(X, dtype=np.float64)
    y = check_binary_targets(y)
    n, d = X.shape
    rng = make_rng(seed)
    model = GBTModel(
        trees=[],
        learning_rate=learning_rate,
        n_features=d,
        lam=lam,
        params={
            "n_trees": n_trees,
            "max_depth": max_depth,
            "learning_rate": learning_rate,
            "subsample": subsample,
            "colsample": colsample,
        },
    )
    F = np.zeros(n, dtype=np.float64)
    model.loss_history.append(logistic_loss(F, y))
    all_rows = np.arange(n)
    all_feats = np.arange(d)
    for _ in range(n_trees):
        p = sigmoid(F)
        g = p - y
        h = p * (1.0 - p)
        rows = all_rows
        if subsample < 1.0:
            rows = np.sort(rng.choice(n, size=max(1, int(round(n * subsample))), replace=False))
        feats = all_feats
        if colsample < 1.0:
            feats = np.sort(rng.choice(d, size=max(1, int(round(d * colsample))), replace=False))
        builder = _TreeBuilder(X, g, h, feats, max_depth, lam)
        builder.build(rows)
        tree = builder.finish()
        model.trees.append(tree)
        F += learning_rate * tree.predict(X)
        model.loss_history.append(logistic_loss(F, y))
    return model


def train_gbt(
    X: np.ndarray,
    y: np.ndarray,
    grid: dict[str, list] | None = None,
    validation: float | tuple[np.ndarray, np.ndarray] = 0.2,
    lam: float = 1.0,
    seed: int = 42,
) -> GBTModel:
    """Grid search by validation ROC-AUC, then refit the winner on all rows.

    ``validation`` is either a holdout fraction (stratified, seeded) or an
    explicit (X_valid, y_valid) pair.  Cells that exhaust memory are
    skipped with a warning.
    """
    from ..evalkit import roc_auc
    from ._common import stratified_holdout

    X = np.asarray(X, dtype=np.float64)
    y = check_binary_targets(y)
    grid = grid or DEFAULT_GRID

    if isinstance(validation, tuple):
        X_tr, y_tr = X, y
        X_va, y_va = validation
        y_va = np.asarray(y_va, dtype=np.float64).ravel()
    else:
        tr, va = stratified_holdout(y, float(validation), seed)
        X_tr, y_tr = X[tr], y[tr]
        X_va, y_va = X[va], y[va]

    keys = sorted(grid)
    best_auc = -np.inf
    best_params = None
    for combo in itertools.product(*(grid[k] for k in keys)):
        params = dict(zip(keys, combo))
        try:
            cell = fit_gbt(X_tr, y_tr, lam=lam, seed=seed, **params)
        except MemoryError:
            warnings.warn(f"grid cell {params} exhausted memory, skipped")
            continue
        auc = roc_auc(cell.scores(X_va), y_va)
        if auc is not None and auc > best_auc:
            best_auc = auc
            best_params = params
    if best_params is None:
        raise TrainingError("no grid cell could be evaluated")
    model = fit_gbt(X, y, lam=lam, seed=seed, **best_params)
    model.params["validation_roc_auc"] = best_auc
    return model
