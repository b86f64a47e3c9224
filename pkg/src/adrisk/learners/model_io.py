"""Versioned JSON serialization for trained models."""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np

from .ffnn import FFNNModel
from .gbt import GBTModel, Tree
from .logreg import LogRegModel

FORMAT = "adrisk-model/1"


class ModelFileError(ValueError):
    pass


def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<f8").tobytes()).decode("ascii")


def _decode(blob: str, shape: tuple[int, ...]) -> np.ndarray:
    return np.frombuffer(base64.b64decode(blob), dtype="<f8").reshape(shape).copy()


def save_model(model, path: str | Path) -> None:
    if isinstance(model, LogRegModel):
        doc = {
            "format": FORMAT,
            "kind": "logreg",
            "dim": model.dim,
            "C": model.C,
            "bias": model.bias,
            "weights": _encode(model.weights),
        }
    elif isinstance(model, FFNNModel):
        doc = {
            "format": FORMAT,
            "kind": "ffnn",
            "layer_sizes": model.layer_sizes,
            "dropout_rate": model.dropout_rate,
            "weights": [_encode(w) for w in model.weights],
            "biases": [_encode(b) for b in model.biases],
        }
    elif isinstance(model, GBTModel):
        doc = {
            "format": FORMAT,
            "kind": "gbt",
            "n_features": model.n_features,
            "learning_rate": model.learning_rate,
            "lam": model.lam,
            "base_logit": model.base_logit,
            "params": {k: v for k, v in model.params.items()},
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in model.trees
            ],
        }
    else:
        raise ModelFileError(f"unsupported model type: {type(model).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT:
        raise ModelFileError(f"unsupported model file format: {doc.get('format')!r}")
    kind = doc.get("kind")
    if kind == "logreg":
        dim = int(doc["dim"])
        return LogRegModel(
            weights=_decode(doc["weights"], (dim,)),
            bias=float(doc["bias"]),
            C=float(doc["C"]),
        )
    if kind == "ffnn":
        sizes = [int(s) for s in doc["layer_sizes"]]
        shapes = list(zip(sizes[:-1], sizes[1:]))
        return FFNNModel(
            weights=[_decode(b, s) for b, s in zip(doc["weights"], shapes)],
            biases=[_decode(b, (s[1],)) for b, s in zip(doc["biases"], shapes)],
            dropout_rate=float(doc["dropout_rate"]),
        )
    if kind == "gbt":
        trees = [
            Tree(
                feature=np.asarray(t["feature"], dtype=np.int32),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int32),
                right=np.asarray(t["right"], dtype=np.int32),
                value=np.asarray(t["value"], dtype=np.float64),
            )
            for t in doc["trees"]
        ]
        return GBTModel(
            trees=trees,
            learning_rate=float(doc["learning_rate"]),
            n_features=int(doc["n_features"]),
            lam=float(doc["lam"]),
            base_logit=float(doc["base_logit"]),
            params=doc.get("params", {}),
        )
    raise ModelFileError(f"unknown model kind: {kind!r}")
