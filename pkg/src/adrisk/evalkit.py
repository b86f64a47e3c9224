"""Stratified cross-validation and the reported metric set.

Positive class is Risky.  ROC-AUC is the probability that a uniformly
random (positive, negative) pair is ranked correctly, ties counting 1/2;
PR-AUC is average precision (step-wise precision x recall increments
over the score-sorted list, not trapezoidal).  Zero-denominator metrics
report 0 with a warning flag rather than NaN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .labelnet import RISKY


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass
class MetricsEntry:
    precision: float
    recall: float
    accuracy: float
    f1: float
    roc_auc: float | None
    pr_auc: float | None
    f1_safe: float
    f1_risky: float
    macro_f1: float
    confusion: ConfusionMatrix
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "roc_auc": self.roc_auc,
            "pr_auc": self.pr_auc,
            "f1_per_class": {"Safe": self.f1_safe, "Risky": self.f1_risky},
            "macro_f1": self.macro_f1,
            "confusion": {
                "tp": self.confusion.tp,
                "fp": self.confusion.fp,
                "fn": self.confusion.fn,
                "tn": self.confusion.tn,
            },
            "warnings": self.warnings,
        }


def stratified_kfold(
    ids: Sequence, y: Sequence[int], k: int = 5, seed: int = 42
) -> list[tuple[list, list]]:
    """k (train, test) id splits with per-class counts balanced within 1."""
    ids = list(ids)
    y = np.asarray(y).ravel()
    if len(ids) != y.shape[0]:
        raise ValueError("ids and y differ in length")
    rng = np.random.Generator(np.random.PCG64(seed))
    chunks_per_class = []
    for cls in np.unique(y):
        members = np.flatnonzero(y == cls)
        if members.size < k:
            raise ValueError(f"class {cls} has {members.size} members, fewer than k={k}")
        members = members[rng.permutation(members.size)]
        chunks_per_class.append(np.array_split(members, k))
    folds = []
    for i in range(k):
        test_idx = np.sort(np.concatenate([chunks[i] for chunks in chunks_per_class]))
        test_set = set(test_idx.tolist())
        train = [ids[j] for j in range(len(ids)) if j not in test_set]
        test = [ids[j] for j in test_idx]
        folds.append((train, test))
    return folds


def _average_ranks(scores: np.ndarray) -> np.ndarray:
    """Ranks 1..n with ties sharing their average rank."""
    order = np.argsort(scores, kind="mergesort")
    ranks = np.empty(scores.shape[0], dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.shape[0]:
        j = i
        while j + 1 < scores.shape[0] and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def roc_auc(scores: Sequence[float], y: Sequence[int]) -> float | None:
    """Rank-based AUC; ties count 1/2.  None when truth is single-class."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y).ravel()
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = _average_ranks(scores)
    u = ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def average_precision(scores: Sequence[float], y: Sequence[int]) -> float | None:
    """PR-AUC as average precision over distinct score thresholds."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y).ravel()
    n_pos = int((y == 1).sum())
    if n_pos == 0:
        return None
    order = np.argsort(-scores, kind="mergesort")
    ys = y[order]
    ss = scores[order]
    ap = 0.0
    tp = fp = 0
    prev_recall = 0.0
    i = 0
    n = ys.shape[0]
    while i < n:
        j = i
        while j + 1 < n and ss[j + 1] == ss[i]:
            j += 1
        tp += int(ys[i : j + 1].sum())
        fp += (j - i + 1) - int(ys[i : j + 1].sum())
        recall = tp / n_pos
        precision = tp / (tp + fp)
        ap += (recall - prev_recall) * precision
        prev_recall = recall
        i = j + 1
    return float(ap)


def confusion_from_labels(pred_risky: np.ndarray, true_risky: np.ndarray) -> ConfusionMatrix:
    tp = int(np.sum(pred_risky & true_risky))
    fp = int(np.sum(pred_risky & ~true_risky))
    fn = int(np.sum(~pred_risky & true_risky))
    tn = int(np.sum(~pred_risky & ~true_risky))
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def _safe_div(num: float, den: float, name: str, warnings: list[str]) -> float:
    if den == 0:
        warnings.append(f"{name} denominator is zero, reported as 0")
        return 0.0
    return num / den


def _f1(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if (p + r) > 0 else 0.0


def metrics(predictions, truth: dict[int, object]) -> MetricsEntry:
    """Score a prediction list against a truth map keyed by id."""
    scores, pred_risky, true_risky = [], [], []
    for p in predictions:
        if p.id not in truth:
            raise KeyError(f"prediction id {p.id} has no truth label")
        t = truth[p.id]
        t_val = getattr(t, "label", t)
        true_risky.append(1 if t_val in (1, RISKY) else 0)
        pred_risky.append(1 if p.label == RISKY else 0)
        scores.append(p.score)
    return metrics_from_scores(
        np.asarray(scores), np.asarray(pred_risky, bool), np.asarray(true_risky, bool)
    )


def metrics_from_scores(
    scores: np.ndarray, pred_risky: np.ndarray, true_risky: np.ndarray
) -> MetricsEntry:
    warns: list[str] = []
    cm = confusion_from_labels(pred_risky, true_risky)
    precision = _safe_div(cm.tp, cm.tp + cm.fp, "precision", warns)
    recall = _safe_div(cm.tp, cm.tp + cm.fn, "recall", warns)
    accuracy = _safe_div(cm.tp + cm.tn, cm.n, "accuracy", warns)
    f1 = _f1(precision, recall)
    # Safe-class view mirrors the confusion matrix.
    p_safe = _safe_div(cm.tn, cm.tn + cm.fn, "precision(Safe)", warns)
    r_safe = _safe_div(cm.tn, cm.tn + cm.fp, "recall(Safe)", warns)
    f1_safe = _f1(p_safe, r_safe)
    y_int = true_risky.astype(int)
    return MetricsEntry(
        precision=precision,
        recall=recall,
        accuracy=accuracy,
        f1=f1,
        roc_auc=roc_auc(scores, y_int),
        pr_auc=average_precision(scores, y_int),
        f1_safe=f1_safe,
        f1_risky=f1,
        macro_f1=0.5 * (f1_safe + f1),
        confusion=cm,
        warnings=warns,
    )


@dataclass
class EvalReport:
    folds: list[MetricsEntry]
    mean: dict[str, float | None]

    def to_json(self) -> dict:
        return {"folds": [f.to_json() for f in self.folds], "mean": self.mean}

    def to_table(self) -> str:
        """Text table in the reported column order."""
        cols = ["precision", "recall", "accuracy", "roc_auc", "f1"]
        header = f"{'fold':>6} " + " ".join(f"{c:>10}" for c in cols)
        lines = [header]
        for i, entry in enumerate(self.folds, 1):
            row = entry.to_json()
            lines.append(
                f"{i:>6} " + " ".join(_fmt_cell(row[c]) for c in cols)
            )
        lines.append(
            f"{'mean':>6} " + " ".join(_fmt_cell(self.mean.get(c)) for c in cols)
        )
        return "\n".join(lines)


def _fmt_cell(v) -> str:
    return f"{v:>10.4f}" if isinstance(v, float) else f"{'--':>10}"


def summarize_folds(folds: list[MetricsEntry]) -> EvalReport:
    keys = ["precision", "recall", "accuracy", "f1", "roc_auc", "pr_auc", "f1_safe", "f1_risky", "macro_f1"]
    mean: dict[str, float | None] = {}
    for key in keys:
        vals = [getattr(f, key) for f in folds]
        present = [v for v in vals if v is not None]
        mean[key] = float(np.mean(present)) if present else None
    return EvalReport(folds=folds, mean=mean)


def cross_validate(
    X: np.ndarray,
    y: Sequence[int],
    ids: Sequence[int],
    fit_score: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    k: int = 5,
    seed: int = 42,
) -> EvalReport:
    """Stratified k-fold evaluation of ``fit_score(X_tr, y_tr, X_te) -> scores``."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).ravel()
    ids = list(ids)
    pos = {ad_id: i for i, ad_id in enumerate(ids)}
    folds = []
    for train_ids, test_ids in stratified_kfold(ids, y, k=k, seed=seed):
        tr = np.asarray([pos[i] for i in train_ids])
        te = np.asarray([pos[i] for i in test_ids])
        scores = np.asarray(fit_score(X[tr], y[tr], X[te]), dtype=np.float64)
        folds.append(
            metrics_from_scores(scores, scores > 0.5, y[te].astype(bool))
        )
    return summarize_folds(folds)


def write_report(report: EvalReport, json_path=None, table_path=None) -> None:
    if json_path:
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(report.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    if table_path:
        with open(table_path, "w", encoding="utf-8") as fh:
            fh.write(report.to_table())
            fh.write("\n")
