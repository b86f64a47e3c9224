"""Synthetic ad ecosystems with planted ground truth.

Generates job-board and escort domains, legitimate recruiters and
traffickers with disjoint phone pools, and template-based ad text whose
linguistic cues differ by class (safe: concrete wage and duties; risky:
vague duties, inflated pay, phone-only contact, urgency).  Trafficker
phones cross-post to escort domains with a configurable probability, so
the network labeler's output can be compared against ground truth.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import AdRecord, DomainInfo, make_record
from .labelnet import ESCORT_CATEGORY, RISKY, SAFE

JOB_CATEGORY = "job_board"

_AREA_CODES = ["212", "347", "404", "415", "512", "617", "702", "770", "773", "914"]

_CITIES = ["New York", "Atlanta", "Chicago", "Houston", "Seattle", "Boston", "Los Angeles"]

_SAFE_ROLES = [
    ("line cook", "prepare menu items, keep station clean"),
    ("office assistant", "answer calls, file paperwork, schedule meetings"),
    ("warehouse associate", "pick and pack orders, load trucks"),
    ("retail cashier", "operate register, restock shelves, assist customers"),
    ("delivery driver", "deliver packages on a fixed route"),
]

_SAFE_TEMPLATES = [
    "{company} is hiring a {role} in {city}. Duties: {duties}. "
    "Pay ${wage}/hour, {hours} hours per week, paid weekly with payroll taxes. "
    "Requirements: work authorization and two references. "
    "Apply with resume to {email} or call {phone}. Posting ref {ref}.",
    "{company} seeks {role}, {city} location. Responsibilities: {duties}. "
    "Wage ${wage} per hour plus overtime, W-2 employment, health plan after 90 days. "
    "Schedule: {hours} hrs/week. Contact HR at {email}. Ref {ref}.",
]

_RISKY_TEMPLATES = [
    "{city} shop urgently recruits young staff, easy work, earn ${big}+ monthly, "
    "housing provided, no experience needed, start today. "
    "Contact number {phone}. Ref {ref}.",
    "High income opportunity in {city}! Flexible duties, cash daily, ${big} or more "
    "every month, room included, act now before spots fill. "
    "Call or text {phone} anytime. Ref {ref}.",
]

_ESCORT_TEMPLATES = [
    "New arrivals in {city}, sweet companions available now, call {phone}. Ref {ref}.",
    "{city} private studio, discreet service, book by phone {phone}. Ref {ref}.",
]

_COMPANIES = ["Golden Gate Foods", "Metro Logistics", "Sunrise Retail Group", "Harbor Staffing"]


@dataclass(frozen=True)
class ScenarioConfig:
    n_job_domains: int = 4
    n_escort_domains: int = 2
    n_legit_recruiters: int = 20
    n_traffickers: int = 5
    ads_per_entity: tuple[int, int] = (1, 4)
    phone_reuse_prob: float = 0.5
    cross_posting_prob: float = 1.0
    seed: int = 42

    def __post_init__(self):
        for name in ("phone_reuse_prob", "cross_posting_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        lo, hi = self.ads_per_entity
        if not (1 <= lo <= hi):
            raise ValueError("ads_per_entity must be a range with 1 <= lo <= hi")
        if self.n_job_domains < 1 or self.n_escort_domains < 1:
            raise ValueError("need at least one domain of each kind")


class _PhonePool:
    """Unique valid phone numbers; traffickers and legits never overlap."""

    def __init__(self, rng: np.random.Generator):
        self.rng = rng
        self.seen: set[str] = set()

    def new_phone(self) -> str:
        while True:
            area = _AREA_CODES[self.rng.integers(len(_AREA_CODES))]
            rest = "".join(str(d) for d in self.rng.integers(0, 10, size=7))
            digits = area + rest
            if digits not in self.seen:
                self.seen.add(digits)
                return digits


def _format_phone(digits: str, rng: np.random.Generator) -> str:
    style = rng.integers(3)
    if style == 0:
        return digits
    if style == 1:
        return f"{digits[:3]}-{digits[3:6]}-{digits[6:]}"
    return f"({digits[:3]}) {digits[3:6]}-{digits[6:]}"


def generate(
    config: ScenarioConfig,
) -> tuple[list[AdRecord], list[DomainInfo], dict[int, str]]:
    """Build (records, categorized domains, ground truth labels).

    Ground truth covers job-domain ads only: trafficker-authored ones are
    Risky, recruiter-authored ones Safe.  Escort-domain ads are label
    sources and carry no ground truth entry.
    """
    rng = np.random.Generator(np.random.PCG64(config.seed))
    pool = _PhonePool(rng)

    job_domains = [f"workboard{i}.example" for i in range(config.n_job_domains)]
    escort_domains = [f"escortads{i}.example" for i in range(config.n_escort_domains)]

    records: list[AdRecord] = []
    ground_truth: dict[int, str] = {}
    ref = 0

    def next_ref() -> str:
        nonlocal ref
        ref += 1
        return f"{ref:06d}"

    # Legitimate recruiters: concrete postings on job boards only.
    for r in range(config.n_legit_recruiters):
        phones = [pool.new_phone() for _ in range(int(rng.integers(1, 3)))]
        company = _COMPANIES[rng.integers(len(_COMPANIES))]
        n_ads = int(rng.integers(config.ads_per_entity[0], config.ads_per_entity[1] + 1))
        for _ in range(n_ads):
            role, duties = _SAFE_ROLES[rng.integers(len(_SAFE_ROLES))]
            city = _CITIES[rng.integers(len(_CITIES))]
            template = _SAFE_TEMPLATES[rng.integers(len(_SAFE_TEMPLATES))]
            body = template.format(
                company=company,
                role=role,
                duties=duties,
                city=city,
                wage=int(rng.integers(16, 28)),
                hours=int(rng.integers(20, 41)),
                email=f"hr{r}@{company.split()[0].lower()}.example",
                phone=_format_phone(phones[int(rng.integers(len(phones)))], rng),
                ref=next_ref(),
            )
            rec = make_record(
                domain=job_domains[int(rng.integers(len(job_domains)))],
                title=f"{company} hiring {role}",
                body=body,
            )
            records.append(rec)
            ground_truth[rec.id] = SAFE

    # Traffickers: vague postings; phones may also surface on escort sites.
    for t in range(config.n_traffickers):
        phones = [pool.new_phone() for _ in range(int(rng.integers(1, 4)))]
        n_ads = int(rng.integers(config.ads_per_entity[0], config.ads_per_entity[1] + 1))
        n_ads = max(n_ads, len(phones))  # every phone appears on >= 1 job ad
        used: list[str] = []
        for k in range(n_ads):
            unused = [p for p in phones if p not in used]
            if unused and (not used or rng.random() >= config.phone_reuse_prob):
                phone = unused[0]
            else:
                phone = used[int(rng.integers(len(used)))] if used else phones[0]
            used.append(phone)
            city = _CITIES[rng.integers(len(_CITIES))]
            template = _RISKY_TEMPLATES[rng.integers(len(_RISKY_TEMPLATES))]
            body = template.format(
                city=city,
                big=int(rng.integers(8, 15)) * 1000,
                phone=_format_phone(phone, rng),
                ref=next_ref(),
            )
            rec = make_record(
                domain=job_domains[int(rng.integers(len(job_domains)))],
                title=f"{city} urgent hire, high income",
                body=body,
            )
            records.append(rec)
            ground_truth[rec.id] = RISKY
        for phone in phones:
            if rng.random() < config.cross_posting_prob:
                city = _CITIES[rng.integers(len(_CITIES))]
                template = _ESCORT_TEMPLATES[rng.integers(len(_ESCORT_TEMPLATES))]
                rec = make_record(
                    domain=escort_domains[int(rng.integers(len(escort_domains)))],
                    title=f"{city} companions",
                    body=template.format(
                        city=city, phone=_format_phone(phone, rng), ref=next_ref()
                    ),
                )
                records.append(rec)

    domains = [
        DomainInfo(name=d, category=JOB_CATEGORY, post_count=sum(r.domain == d for r in records))
        for d in job_domains
    ] + [
        DomainInfo(name=d, category=ESCORT_CATEGORY, post_count=sum(r.domain == d for r in records))
        for d in escort_domains
    ]
    return records, domains, ground_truth


def write_ground_truth(ground_truth: dict[int, str], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ad_id, label in ground_truth.items():
            fh.write(json.dumps({"id": ad_id, "label": label}))
            fh.write("\n")


def read_ground_truth(path: str | Path) -> dict[int, str]:
    out: dict[int, str] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                obj = json.loads(line)
                out[int(obj["id"])] = obj["label"]
    return out
