"""Phone co-occurrence network and Safe/Risky label assignment.

An ad on a labor-oriented domain is Risky when one of its phone numbers
also appears on an escort-category domain, Safe otherwise.  Ads posted on
escort domains themselves are label sources, not labeled.  A brute-force
oracle with no graph structure is included for verification.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import UNCATEGORIZED, AdRecord, DomainInfo, NormalizedPhone

SAFE = "Safe"
RISKY = "Risky"

SOURCE_DIRECT = "direct"
SOURCE_AUGMENTED = "augmented"

ESCORT_CATEGORY = "escort"


class UncategorizedDomainError(ValueError):
    """Records reference domains with no usable category."""

    def __init__(self, domains: list[str]):
        self.domains = sorted(domains)
        super().__init__(
            "records reference uncategorized domain(s): " + ", ".join(self.domains)
        )


@dataclass(frozen=True)
class RiskLabel:
    label: str
    evidence: frozenset[tuple[str, str]] = frozenset()  # (phone digits, escort domain)
    source: str = SOURCE_DIRECT
    trigger_phones: frozenset[str] = frozenset()

    def __post_init__(self):
        risky = bool(self.evidence) or (
            self.source == SOURCE_AUGMENTED and bool(self.trigger_phones)
        )
        if (self.label == RISKY) != risky:
            raise ValueError(f"label {self.label!r} inconsistent with evidence")


@dataclass
class ContactGraph:
    """Bipartite ad-phone / phone-domain occurrence structure."""

    ad_phones: dict[int, frozenset[NormalizedPhone]] = field(default_factory=dict)
    ad_domain: dict[int, str] = field(default_factory=dict)
    phone_domains: dict[NormalizedPhone, frozenset[str]] = field(default_factory=dict)
    domain_category: dict[str, str] = field(default_factory=dict)


def _category_map(records: list[AdRecord], domains: list[DomainInfo]) -> dict[str, str]:
    cat = {d.name: d.category for d in domains}
    bad = {
        r.domain
        for r in records
        if cat.get(r.domain, UNCATEGORIZED) == UNCATEGORIZED
    }
    if bad:
        raise UncategorizedDomainError(list(bad))
    return cat


def build_graph(records: list[AdRecord], domains: list[DomainInfo]) -> ContactGraph:
    """Construct the co-occurrence graph from deduplicated, categorized records."""
    cat = _category_map(records, domains)
    graph = ContactGraph(domain_category=cat)
    phone_domains: dict[NormalizedPhone, set[str]] = {}
    for rec in records:
        graph.ad_phones[rec.id] = rec.phones
        graph.ad_domain[rec.id] = rec.domain
        for phone in rec.phones:
            phone_domains.setdefault(phone, set()).add(rec.domain)
    graph.phone_domains = {p: frozenset(ds) for p, ds in phone_domains.items()}
    return graph


def _direct_label(evidence: set[tuple[str, str]]) -> RiskLabel:
    if evidence:
        return RiskLabel(
            label=RISKY,
            evidence=frozenset(evidence),
            source=SOURCE_DIRECT,
            trigger_phones=frozenset(p for p, _ in evidence),
        )
    return RiskLabel(label=SAFE)


def assign_labels(graph: ContactGraph) -> dict[int, RiskLabel]:
    """Label every labor-side ad by one-hop reachability to escort domains."""
    labels: dict[int, RiskLabel] = {}
    for ad_id, phones in graph.ad_phones.items():
        if graph.domain_category[graph.ad_domain[ad_id]] == ESCORT_CATEGORY:
            continue
        evidence = {
            (p.digits, d)
            for p in phones
            for d in graph.phone_domains.get(p, frozenset())
            if graph.domain_category[d] == ESCORT_CATEGORY
        }
        labels[ad_id] = _direct_label(evidence)
    return labels


def risky_phone_set(labels: dict[int, RiskLabel]) -> set[str]:
    """All phone digits carrying direct Risky evidence."""
    return {p for lab in labels.values() for p, _ in lab.evidence}


def augment_risky(
    graph: ContactGraph,
    extra_records: list[AdRecord],
    risky_phones: set[str],
) -> list[tuple[AdRecord, RiskLabel]]:
    """Admit externally sourced pages that share a risk-labeled phone.

    Records with no risky phone are discarded, never labeled Safe.
    """
    out = []
    for rec in extra_records:
        triggering = {p for p in rec.phones if p.digits in risky_phones}
        if not triggering:
            continue
        evidence = {
            (p.digits, d)
            for p in triggering
            for d in graph.phone_domains.get(p, frozenset())
            if graph.domain_category.get(d) == ESCORT_CATEGORY
        }
        label = RiskLabel(
            label=RISKY,
            evidence=frozenset(evidence),
            source=SOURCE_AUGMENTED,
            trigger_phones=frozenset(p.digits for p in triggering),
        )
        out.append((rec, label))
    return out


def label_oracle(
    records: list[AdRecord], domains: list[DomainInfo]
) -> dict[int, RiskLabel]:
    """Brute-force labeler: nested scan over (ad, phone, occurrence) triples.

    Builds no graph structure; exists purely to cross-check
    build_graph + assign_labels.
    """
    cat = _category_map(records, domains)
    escort_occurrences = [
        (rec.domain, rec.phones) for rec in records if cat[rec.domain] == ESCORT_CATEGORY
    ]
    labels: dict[int, RiskLabel] = {}
    for rec in records:
        if cat[rec.domain] == ESCORT_CATEGORY:
            continue
        evidence = set()
        for phone in rec.phones:
            for dom, phones in escort_occurrences:
                if phone in phones:
                    evidence.add((phone.digits, dom))
        labels[rec.id] = _direct_label(evidence)
    return labels


def label_to_json(ad_id: int, label: RiskLabel) -> dict:
    obj = {
        "id": ad_id,
        "label": label.label,
        "source": label.source,
        "evidence": [
            {"phone": p, "domain": d} for p, d in sorted(label.evidence)
        ],
    }
    if label.source == SOURCE_AUGMENTED:
        obj["trigger_phones"] = sorted(label.trigger_phones)
    return obj


def label_from_json(obj: dict) -> tuple[int, RiskLabel]:
    evidence = frozenset((e["phone"], e["domain"]) for e in obj.get("evidence", []))
    triggers = frozenset(obj.get("trigger_phones", [p for p, _ in evidence]))
    return int(obj["id"]), RiskLabel(
        label=obj["label"],
        evidence=evidence,
        source=obj.get("source", SOURCE_DIRECT),
        trigger_phones=triggers if obj["label"] == RISKY else frozenset(),
    )


def write_labels(labels: dict[int, RiskLabel], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ad_id in labels:
            fh.write(json.dumps(label_to_json(ad_id, labels[ad_id]), sort_keys=True))
            fh.write("\n")


def read_labels(path: str | Path) -> dict[int, RiskLabel]:
    labels: dict[int, RiskLabel] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                ad_id, label = label_from_json(json.loads(line))
                labels[ad_id] = label
    return labels
