"""Majority-vote fusion of per-model predictions.

Each model casts a Safe/Risky label vote per ad; the fused label is
Risky only when strictly more than half the votes are Risky, so an exact
tie resolves to Safe.  (A recall-first deployment may prefer tie ->
Risky; that is a one-line change documented here on purpose.)
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .labelnet import RISKY, SAFE
from .learners.predict import Prediction, read_predictions

ENSEMBLE_MODEL_NAME = "trafficker_classifier"


class PredictionFileError(ValueError):
    pass


@dataclass(frozen=True)
class VoteSet:
    id: int
    votes: dict[str, str]  # model_name -> Safe/Risky
    final: str

    def __post_init__(self):
        if not self.votes:
            raise ValueError("a VoteSet needs at least one vote")


def majority_vote(votes: Sequence[str]) -> str:
    """Risky iff strictly more than half the votes are Risky."""
    if len(votes) == 0:
        raise ValueError("majority_vote needs at least one vote")
    risky = sum(1 for v in votes if v == RISKY)
    return RISKY if risky * 2 > len(votes) else SAFE


def load_predictions(
    paths: Sequence[str | Path],
) -> tuple[dict[int, dict[str, str]], set[int]]:
    """Collect votes per id from prediction files.

    Returns (votes_by_id, incomplete_ids); an id is incomplete when it is
    missing from at least one file.  Duplicate (id, model_name) pairs and
    duplicate model names across files are errors.
    """
    if not paths:
        raise PredictionFileError("no prediction files given")
    votes: dict[int, dict[str, str]] = {}
    model_names: list[str] = []
    ids_per_model: dict[str, set[int]] = {}
    for path in paths:
        for pred in read_predictions(path):
            if pred.model_name not in ids_per_model:
                ids_per_model[pred.model_name] = set()
                model_names.append(pred.model_name)
            if pred.id in ids_per_model[pred.model_name]:
                raise PredictionFileError(
                    f"duplicate prediction for id {pred.id} from model {pred.model_name!r}"
                )
            ids_per_model[pred.model_name].add(pred.id)
            votes.setdefault(pred.id, {})[pred.model_name] = pred.label
    if not votes:
        raise PredictionFileError("prediction files contain no rows")
    incomplete = {
        ad_id for ad_id, v in votes.items() if len(v) < len(model_names)
    }
    return votes, incomplete


def fuse(votes_by_id: dict[int, dict[str, str]]) -> list[VoteSet]:
    out = []
    for ad_id, votes in votes_by_id.items():
        out.append(VoteSet(id=ad_id, votes=dict(votes), final=majority_vote(list(votes.values()))))
    return out


def ensemble_predictions(vote_sets: Sequence[VoteSet]) -> list[Prediction]:
    """Emit fused votes in the common prediction schema.

    The score is the Risky vote fraction; with the strict > 0.5 threshold
    this reproduces the majority label exactly (ties land on Safe).
    """
    preds = []
    for vs in vote_sets:
        risky = sum(1 for v in vs.votes.values() if v == RISKY)
        score = risky / len(vs.votes)
        preds.append(
            Prediction(id=vs.id, score=score, label=vs.final, model_name=ENSEMBLE_MODEL_NAME)
        )
    return preds
