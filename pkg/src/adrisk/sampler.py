"""Deterministic class-rebalancing of labeled records.

Two strategies: keep every Risky record and downsample Safe to a 50/50
split, or to an 80/20 split (Risky = 20% of the total).  All randomness
comes from NumPy's PCG64 generator seeded explicitly (default 42), so a
given (input, strategy, seed) triple always yields the same sample in the
same order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .labelnet import RISKY, SAFE, RiskLabel

BALANCED = "balanced_50_50"
MODERATE = "moderate_80_20"

_RISKY_FRACTION = {BALANCED: 0.5, MODERATE: 0.2}

_ALIASES = {
    "balanced": BALANCED,
    "moderate": MODERATE,
    BALANCED: BALANCED,
    MODERATE: MODERATE,
}


class SamplingError(ValueError):
    pass


@dataclass(frozen=True)
class SamplePlan:
    strategy: str
    seed: int
    risky_count: int
    safe_count: int

    @property
    def total(self) -> int:
        return self.risky_count + self.safe_count


def resolve_strategy(name: str) -> str:
    try:
        return _ALIASES[name]
    except KeyError:
        raise SamplingError(f"unknown sampling strategy: {name!r}") from None


def plan_sample(strategy: str, n_risky: int, n_safe: int, seed: int = 42) -> SamplePlan:
    """Compute the safe-class draw size for a strategy, validating feasibility."""
    strategy = resolve_strategy(strategy)
    r = _RISKY_FRACTION[strategy]
    safe_count = int(round(n_risky * (1.0 - r) / r))
    if safe_count > n_safe:
        raise SamplingError(
            f"strategy {strategy} needs {safe_count} safe records, only {n_safe} available"
        )
    return SamplePlan(strategy=strategy, seed=seed, risky_count=n_risky, safe_count=safe_count)


def sample(
    records_with_labels: Sequence[tuple[Any, RiskLabel]],
    strategy: str,
    seed: int = 42,
) -> list[tuple[Any, RiskLabel]]:
    """Draw the rebalanced training sample.

    Every Risky record is retained; Safe records are drawn uniformly
    without replacement; the combined result is shuffled.  Both draws use
    PCG64(seed).
    """
    risky = [(item, lab) for item, lab in records_with_labels if lab.label == RISKY]
    safe = [(item, lab) for item, lab in records_with_labels if lab.label == SAFE]
    plan = plan_sample(strategy, len(risky), len(safe), seed)

    rng = np.random.Generator(np.random.PCG64(seed))
    chosen_idx = rng.choice(len(safe), size=plan.safe_count, replace=False)
    combined = risky + [safe[i] for i in chosen_idx]
    order = rng.permutation(len(combined))
    return [combined[i] for i in order]


def write_manifest(
    sampled: Sequence[tuple[Any, RiskLabel]], strategy: str, path: str | Path
) -> None:
    """Emit the sample as JSONL of ids with a split tag."""
    split = resolve_strategy(strategy)
    with open(path, "w", encoding="utf-8") as fh:
        for item, lab in sampled:
            ad_id = item if isinstance(item, int) else item.id
            fh.write(json.dumps({"id": ad_id, "label": lab.label, "split": split}))
            fh.write("\n")


def read_manifest(path: str | Path) -> list[dict]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rows.append(json.loads(line))
    return rows
