"""Prediction records and the prediction-file JSONL schema.

External baselines (fine-tuned transformers, prompted LLMs) deliver
their votes as files in the same ``{id, score, label, model_name}``
schema the native models emit, so the ensemble cannot tell them apart.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..labelnet import RISKY, SAFE

RISK_THRESHOLD = 0.5  # strict: score must exceed it to be Risky


@dataclass(frozen=True)
class Prediction:
    id: int
    score: float
    label: str
    model_name: str

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score {self.score} outside [0, 1]")
        if self.label != score_label(self.score):
            raise ValueError("label inconsistent with score threshold")


def score_label(score: float) -> str:
    return RISKY if score > RISK_THRESHOLD else SAFE


def predict(model, X: np.ndarray, ids: list[int], model_name: str) -> list[Prediction]:
    """Score rows with any model exposing ``scores`` and attach ids/labels."""
    scores = model.scores(np.asarray(X, dtype=np.float64))
    if len(ids) != scores.shape[0]:
        raise ValueError("ids and rows differ in length")
    return [
        Prediction(id=i, score=float(s), label=score_label(float(s)), model_name=model_name)
        for i, s in zip(ids, scores)
    ]


def write_predictions(preds: list[Prediction], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in preds:
            fh.write(
                json.dumps(
                    {"id": p.id, "score": p.score, "label": p.label, "model_name": p.model_name},
                    sort_keys=True,
                )
            )
            fh.write("\n")


def read_predictions(path: str | Path) -> list[Prediction]:
    preds = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            preds.append(
                Prediction(
                    id=int(obj["id"]),
                    score=float(obj["score"]),
                    label=obj["label"],
                    model_name=obj["model_name"],
                )
            )
    return preds
