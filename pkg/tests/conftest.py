"""Shared fixtures and corpus builders for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from adrisk.corpus import AdRecord, DomainInfo, NormalizedPhone


def phone(digits: str) -> NormalizedPhone:
    return NormalizedPhone(digits=digits, raw=digits)


def bare_record(ad_id: int, domain: str, phones: list[str]) -> AdRecord:
    """Minimal record for labeling tests; text content is irrelevant."""
    return AdRecord(
        id=ad_id,
        domain=domain,
        title="t",
        body="x",
        phones=frozenset(phone(d) for d in phones),
    )


def random_label_corpus(
    rng: np.random.Generator,
    n_ads: int,
    n_phones: int,
    n_domains: int = 8,
    escort_frac: float = 0.25,
) -> tuple[list[AdRecord], list[DomainInfo]]:
    """Random ad/phone/domain structure for labeling equivalence checks."""
    n_escort = max(1, int(round(n_domains * 0.3)))
    domains = [
        DomainInfo(name=f"d{i}.example", category="escort" if i < n_escort else "job_board")
        for i in range(n_domains)
    ]
    pool = [f"{int(v):010d}" for v in rng.integers(0, 10**10, size=n_phones)]
    records = []
    for ad_id in range(n_ads):
        if rng.random() < escort_frac:
            dom = domains[int(rng.integers(n_escort))]
        else:
            dom = domains[int(rng.integers(n_escort, n_domains))]
        k = int(rng.integers(0, 4))
        phones = {pool[int(i)] for i in rng.integers(0, n_phones, size=k)} if k else set()
        records.append(bare_record(ad_id, dom.name, sorted(phones)))
    return records, domains


@pytest.fixture
def six_ad_fixture():
    """Hand-drawn graph: 6 ads, 4 phones, 3 domains (one escort)."""
    domains = [
        DomainInfo(name="jobs.example", category="job_board"),
        DomainInfo(name="board.example", category="job_board"),
        DomainInfo(name="escort.example", category="escort"),
    ]
    p1, p2, p3, p4 = "2125550001", "7705550002", "3475550003", "6175550004"
    records = [
        bare_record(1, "jobs.example", [p1]),          # risky via escort ad 5
        bare_record(2, "jobs.example", [p2, p3]),      # risky via p3 on ad 6
        bare_record(3, "board.example", [p2]),         # safe: p2 job-only
        bare_record(4, "board.example", []),           # safe: no phones
        bare_record(5, "escort.example", [p1]),
        bare_record(6, "escort.example", [p3, p4]),
    ]
    return records, domains, (p1, p2, p3, p4)
