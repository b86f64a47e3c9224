"""Corpus ingestion, normalization, phone extraction and domain categorization.

Raw advertisements arrive as JSONL (one ad per line, at minimum
``{domain, title, body}``).  This module turns them into immutable
:class:`AdRecord` values with stable content-hash ids, extracts 10-digit
US contact numbers, deduplicates, filters low-volume domains, and assigns
each domain a category from a keyword lexicon.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import tomli

# Separators tolerated between digit groups of a phone number.
PHONE_SEPARATORS = " -().+"

# Placeholder token used when scrubbing phone numbers out of ad text.
PHONE_PLACEHOLDER = "<PHONE>"

# Categories that must exist in every category lexicon.
RESERVED_CATEGORIES = ("job_board", "escort")

# Sentinel category for domains no lexicon keyword matched.
UNCATEGORIZED = "uncategorized"


class LexiconError(ValueError):
    """Raised when a category lexicon file is malformed."""


@dataclass(frozen=True)
class NormalizedPhone:
    """A 10-digit US national phone number plus the substring it came from.

    Equality and hashing use only ``digits`` so that sets deduplicate the
    same number written in different styles; ``raw`` keeps the first form
    seen for scrubbing and review.
    """

    digits: str
    raw: str = field(compare=False)

    def __post_init__(self):
        if not re.fullmatch(r"[0-9]{10}", self.digits):
            raise ValueError(f"not a 10-digit number: {self.digits!r}")


@dataclass(frozen=True)
class AdRecord:
    """One job or escort advertisement."""

    id: int
    domain: str
    title: str
    body: str
    language: str = "und"
    url: str | None = None
    phones: frozenset[NormalizedPhone] = frozenset()
    snippet: str | None = None


@dataclass(frozen=True)
class DomainInfo:
    name: str
    category: str = UNCATEGORIZED
    post_count: int = 0


@dataclass(frozen=True)
class IngestError:
    line_no: int
    reason: str


@dataclass
class IngestReport:
    path: str
    total_lines: int = 0
    accepted: int = 0
    errors: list[IngestError] = field(default_factory=list)


@dataclass(frozen=True)
class CategoryLexicon:
    """Category -> keyword lists, matched against domain names in priority order."""

    priority: tuple[str, ...]
    keywords: dict[str, tuple[str, ...]]


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def compute_id(title: str, body: str, domain: str) -> int:
    """Stable 64-bit content hash of (title, body, domain).

    Lowercased and whitespace-collapsed before hashing so trivial
    reformatting does not defeat deduplication.
    """
    canon = "\x1f".join(
        _collapse_ws(part.lower()) for part in (title, body, domain)
    )
    digest = hashlib.sha256(canon.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def normalize_domain(domain: str) -> str:
    """Lowercase and reduce a domain field to its bare host name."""
    d = domain.strip().lower()
    if "://" in d:
        d = d.split("://", 1)[1]
    d = d.split("/", 1)[0].split(":", 1)[0]
    if d.startswith("www."):
        d = d[4:]
    return d.rstrip(".")


_CJK = re.compile(r"[㐀-䶿一-鿿豈-﫿]")
_CYRILLIC = re.compile(r"[Ѐ-ӿ]")
_LATIN = re.compile(r"[A-Za-z]")


def detect_language(text: str) -> str:
    """Script-based language guess: zh / ru / en, or "und".

    Deterministic by construction; good enough to bucket this corpus's
    three languages without a model dependency.
    """
    cjk = len(_CJK.findall(text))
    cyr = len(_CYRILLIC.findall(text))
    lat = len(_LATIN.findall(text))
    total = cjk + cyr + lat
    if total == 0:
        return "und"
    best = max((cjk, "zh"), (cyr, "ru"), (lat, "en"))
    return best[1] if best[0] > 0 else "und"


def _iter_phone_runs(text: str):
    """Yield (digits, raw) for every maximal digit run that forms a phone.

    A run is a sequence of ASCII digits possibly interleaved with the
    separators ``space - ( ) . +``; it ends at the last digit before any
    other character.  Runs of exactly 10 digits qualify, as do 11-digit
    runs with a leading US country code "1" (stripped).
    """
    n = len(text)
    i = 0
    while i < n:
        ch = text[i]
        if not ch.isascii() or not ch.isdigit():
            i += 1
            continue
        digits = []
        last_digit_end = i
        j = i
        while j < n:
            c = text[j]
            if c.isascii() and c.isdigit():
                digits.append(c)
                j += 1
                last_digit_end = j
            elif c in PHONE_SEPARATORS:
                j += 1
            else:
                break
        run = "".join(digits)
        raw = text[i:last_digit_end]
        if len(run) == 10:
            yield run, raw
        elif len(run) == 11 and run[0] == "1":
            yield run[1:], raw
        i = last_digit_end if last_digit_end > i else i + 1


def extract_phones(text: str) -> set[NormalizedPhone]:
    """Extract every distinct 10-digit US phone number from free text."""
    found: dict[str, NormalizedPhone] = {}
    for digits, raw in _iter_phone_runs(text):
        if digits not in found:
            found[digits] = NormalizedPhone(digits=digits, raw=raw)
    return set(found.values())


def snippet_match(snippet: str, query_phone: NormalizedPhone) -> bool:
    """True iff the queried phone literally occurs in a search snippet."""
    return query_phone in extract_phones(snippet)


def scrub_text(text: str) -> str:
    """Replace every phone-number occurrence with the placeholder token.

    Iterates until extract_phones finds nothing, so overlapping raw forms
    (e.g. an 11-digit run containing a 10-digit one) cannot leak digits.
    """
    while True:
        raws = {raw for _, raw in _iter_phone_runs(text)}
        if not raws:
            return text
        # Longest first so a raw that contains another raw is removed whole.
        for raw in sorted(raws, key=len, reverse=True):
            text = text.replace(raw, PHONE_PLACEHOLDER)


def scrub_phones(record: AdRecord) -> AdRecord:
    """Return a copy of the record with phones blanked out of title and body.

    ``id`` and ``phones`` are kept unchanged: the id was assigned from the
    original content at ingest, and the phone set remains available to the
    labeling stage (and only to it).
    """
    return replace(
        record,
        title=scrub_text(record.title),
        body=scrub_text(record.body),
        snippet=scrub_text(record.snippet) if record.snippet else record.snippet,
    )


def make_record(
    domain: str,
    title: str,
    body: str,
    url: str | None = None,
    language: str | None = None,
    snippet: str | None = None,
) -> AdRecord:
    """Build an AdRecord from raw fields, computing id, phones and language."""
    if not body or not body.strip():
        raise ValueError("body is empty")
    dom = normalize_domain(domain)
    if not dom:
        raise ValueError("domain is empty")
    phones = extract_phones(title) | extract_phones(body)
    return AdRecord(
        id=compute_id(title, body, dom),
        domain=dom,
        title=title,
        body=body,
        language=language or detect_language(title + " " + body),
        url=url,
        phones=frozenset(phones),
        snippet=snippet,
    )


def ingest(path: str | Path, format: str = "jsonl") -> tuple[list[AdRecord], IngestReport]:
    """Read raw ads from a JSONL file.

    Malformed lines and invariant violations are collected in the report,
    never aborting the batch.
    """
    if format != "jsonl":
        raise ValueError(f"unsupported ingest format: {format!r}")
    path = Path(path)
    report = IngestReport(path=str(path))
    records: list[AdRecord] = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            report.total_lines += 1
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                report.errors.append(IngestError(line_no, f"invalid JSON: {exc.msg}"))
                continue
            if not isinstance(obj, dict):
                report.errors.append(IngestError(line_no, "line is not a JSON object"))
                continue
            missing = [k for k in ("domain", "title", "body") if k not in obj]
            if missing:
                report.errors.append(
                    IngestError(line_no, f"missing required field(s): {', '.join(missing)}")
                )
                continue
            try:
                rec = make_record(
                    domain=str(obj["domain"]),
                    title=str(obj["title"]),
                    body=str(obj["body"]),
                    url=obj.get("url"),
                    language=obj.get("language"),
                    snippet=obj.get("snippet"),
                )
            except ValueError as exc:
                report.errors.append(IngestError(line_no, str(exc)))
                continue
            records.append(rec)
            report.accepted += 1
    return records, report


def dedup(records: list[AdRecord]) -> list[AdRecord]:
    """Keep exactly one record per content id, first occurrence wins."""
    seen: set[int] = set()
    out = []
    for rec in records:
        if rec.id in seen:
            continue
        seen.add(rec.id)
        out.append(rec)
    return out


def domains_from_records(records: list[AdRecord]) -> list[DomainInfo]:
    """Tally post counts per domain, in first-seen order, uncategorized."""
    counts: dict[str, int] = {}
    for rec in records:
        counts[rec.domain] = counts.get(rec.domain, 0) + 1
    return [DomainInfo(name=d, post_count=c) for d, c in counts.items()]


def filter_domains(
    records: list[AdRecord], min_posts: int = 5
) -> tuple[list[AdRecord], list[DomainInfo]]:
    """Drop domains contributing fewer than ``min_posts`` records.

    Returns the surviving records (content untouched, order preserved)
    and the dropped domains with their post counts.
    """
    if min_posts < 1:
        raise ValueError("min_posts must be >= 1")
    infos = domains_from_records(records)
    dropped = [d for d in infos if d.post_count < min_posts]
    dropped_names = {d.name for d in dropped}
    kept = [r for r in records if r.domain not in dropped_names]
    return kept, dropped


def load_category_lexicon(path: str | Path) -> CategoryLexicon:
    """Load a TOML category lexicon and validate it.

    Expected shape::

        priority = ["escort", "job_board", ...]
        [keywords]
        escort = ["escort", "sex"]
        job_board = ["work", "chinesein"]
    """
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    priority = data.get("priority")
    keywords = data.get("keywords")
    if not isinstance(priority, list) or not priority:
        raise LexiconError("lexicon must define a non-empty 'priority' list")
    if not isinstance(keywords, dict):
        raise LexiconError("lexicon must define a '[keywords]' table")
    return build_category_lexicon(priority, keywords)


def build_category_lexicon(
    priority: list[str], keywords: dict[str, list[str]]
) -> CategoryLexicon:
    for reserved in RESERVED_CATEGORIES:
        if reserved not in keywords:
            raise LexiconError(f"reserved category {reserved!r} missing from lexicon")
    for cat in priority:
        if cat not in keywords:
            raise LexiconError(f"priority lists unknown category {cat!r}")
    for cat in keywords:
        if cat not in priority:
            raise LexiconError(f"category {cat!r} missing from priority order")
    seen: dict[str, str] = {}
    normed: dict[str, tuple[str, ...]] = {}
    for cat, kws in keywords.items():
        if not kws:
            raise LexiconError(f"category {cat!r} has an empty keyword list")
        lowered = tuple(str(k).lower() for k in kws)
        for kw in lowered:
            if kw in seen and seen[kw] != cat:
                raise LexiconError(
                    f"keyword {kw!r} appears in both {seen[kw]!r} and {cat!r}"
                )
            seen[kw] = cat
        normed[cat] = lowered
    return CategoryLexicon(priority=tuple(priority), keywords=normed)


def categorize_domains(
    domains: list[DomainInfo], lexicon: CategoryLexicon
) -> list[DomainInfo]:
    """Assign each domain the first priority category with a keyword hit.

    Matching is case-insensitive substring over the domain name; domains
    with no hit come back as ``uncategorized`` for manual lexicon
    expansion.
    """
    out = []
    for dom in domains:
        name = dom.name.lower()
        assigned = UNCATEGORIZED
        for cat in lexicon.priority:
            if any(kw in name for kw in lexicon.keywords[cat]):
                assigned = cat
                break
        out.append(replace(dom, category=assigned))
    return out


def record_to_json(record: AdRecord, scrubbed: AdRecord | None = None) -> dict:
    """Canonical corpus JSONL object for one record."""
    if scrubbed is None:
        scrubbed = scrub_phones(record)
    obj = {
        "id": record.id,
        "domain": record.domain,
        "title": record.title,
        "body": record.body,
        "language": record.language,
        "phones": sorted(p.digits for p in record.phones),
        "scrubbed_title": scrubbed.title,
        "scrubbed_body": scrubbed.body,
    }
    if record.url is not None:
        obj["url"] = record.url
    if record.snippet is not None:
        obj["snippet"] = record.snippet
    return obj


def record_from_json(obj: dict) -> AdRecord:
    """Rebuild an AdRecord from a canonical corpus JSONL object."""
    phones = frozenset(
        NormalizedPhone(digits=d, raw=d) for d in obj.get("phones", [])
    )
    return AdRecord(
        id=int(obj["id"]),
        domain=obj["domain"],
        title=obj["title"],
        body=obj["body"],
        language=obj.get("language", "und"),
        url=obj.get("url"),
        phones=phones,
        snippet=obj.get("snippet"),
    )


def write_corpus(records: list[AdRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(record_to_json(rec), ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def read_corpus(path: str | Path) -> list[AdRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(record_from_json(json.loads(line)))
    return records
