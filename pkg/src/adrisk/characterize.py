"""Per-ad structured attributes and the risk characterization reports.

Extracts domain/job/phone locations, gender preference, industry and
contact methods for every ad, classifies the three location signals into
a 12-way agreement taxonomy, and aggregates volume and percentage tables
split by final Safe/Risky label.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .corpus import AdRecord, NormalizedPhone
from .labelnet import RISKY

UNSPECIFIED = "Unspecified"
UNKNOWN = "Unknown"

GENDER_FEMALE = "Female"
GENDER_MALE = "Male"
GENDER_COUPLE = "Couple"
GENDER_UNSPECIFIED = "Unspecified"

METHOD_PHONE = "phone"
METHOD_EMAIL = "email"
METHOD_WECHAT = "wechat"
METHOD_OTHER_IM = "other_im"
METHOD_IN_PERSON = "in_person"

# The 12 location-agreement categories.
ALL_MATCH = "AllMatch"
ALL_MISMATCH = "AllMismatch"
PHONE_LOC_MISMATCH = "PhoneLocMismatch"
DOMAIN_LOC_MISMATCH = "DomainLocMismatch"
JOB_LOC_MISMATCH = "JobLocMismatch"
DOMAIN_LOC_UNSPEC_MATCH = "DomainLocUnspecMatch"
DOMAIN_LOC_UNSPEC_MISMATCH = "DomainLocUnspecMismatch"
PHONE_LOC_UNKNOWN_MATCH = "PhoneLocUnknownMatch"
PHONE_LOC_UNKNOWN_MISMATCH = "PhoneLocUnknownMismatch"
JOB_LOC_UNKNOWN_MATCH = "JobLocUnknownMatch"
JOB_LOC_UNKNOWN_MISMATCH = "JobLocUnknownMismatch"
NOT_COMPARABLE = "NotComparable"

MATCH_CATEGORIES = (
    ALL_MATCH,
    ALL_MISMATCH,
    PHONE_LOC_MISMATCH,
    DOMAIN_LOC_MISMATCH,
    JOB_LOC_MISMATCH,
    DOMAIN_LOC_UNSPEC_MATCH,
    DOMAIN_LOC_UNSPEC_MISMATCH,
    PHONE_LOC_UNKNOWN_MATCH,
    PHONE_LOC_UNKNOWN_MISMATCH,
    JOB_LOC_UNKNOWN_MATCH,
    JOB_LOC_UNKNOWN_MISMATCH,
    NOT_COMPARABLE,
)

# Industry the deception analysis excludes (explicit labor, not deceptive
# recruitment); its rows stay in the data output but are flagged.
FLAGGED_INDUSTRY = "sex_work"

# Gender rule keywords.  Couple wins over single-gender mentions; Latin
# and Cyrillic keywords match on word boundaries ("female" must not fire
# "male"), CJK characters match as substrings.
COUPLE_KEYWORDS = ("married couple", "couple", "couples", "夫妻", "夫妇", "两口子", "пара", "супруги")
FEMALE_KEYWORDS = (
    "female", "females", "woman", "women", "lady", "ladies", "girl", "girls",
    "女", "девушка", "девушки", "женщина", "женщины",
)
MALE_KEYWORDS = (
    "male", "males", "man", "men", "gentleman", "gentlemen",
    "男", "мужчина", "мужчины", "парень",
)

WECHAT_KEYWORDS = ("wechat", "weixin", "微信", "вичат")
OTHER_IM_KEYWORDS = (
    "whatsapp", "telegram", "qq", "viber", "skype", "signal", "line id", "телеграм",
)
IN_PERSON_KEYWORDS = (
    "walk in", "walk-in", "in person", "apply in person", "面谈", "面试", "当面", "лично",
)

EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")

_CJK_RE = re.compile(r"[㐀-䶿一-鿿]")


@dataclass(frozen=True)
class AttributeRecord:
    id: int
    domain_loc: str
    job_loc: str
    phone_loc: str
    gender: str
    industry: str
    contact_methods: frozenset[str]
    primary_contact: str


@dataclass(frozen=True)
class KeywordMap:
    """Ordered keyword -> label pairs; earlier entries take priority."""

    entries: tuple[tuple[str, str], ...]


def load_keyword_map(path: str | Path) -> KeywordMap:
    """Load a flat TOML keyword map: ``[keywords]`` with keyword = label."""
    with open(path, "rb") as fh:
        data = tomli.load(fh)
    table = data.get("keywords")
    if not isinstance(table, dict) or not table:
        raise ValueError(f"{path}: expected a non-empty [keywords] table")
    return KeywordMap(entries=tuple((str(k).lower(), str(v)) for k, v in table.items()))


def _is_cjk(keyword: str) -> bool:
    return bool(_CJK_RE.search(keyword))


def _keyword_position(text_lower: str, keyword: str) -> int | None:
    """First match position under the script-aware boundary rule."""
    if _is_cjk(keyword):
        pos = text_lower.find(keyword)
        return pos if pos >= 0 else None
    m = re.search(rf"\b{re.escape(keyword)}\b", text_lower)
    return m.start() if m else None


def _keyword_hit(text_lower: str, keyword: str) -> bool:
    return _keyword_position(text_lower, keyword) is not None


def domain_location(domain: str, geo_lexicon: KeywordMap) -> str:
    """Infer a state from geographic fragments of the domain name.

    Longest keywords are tried first so that e.g. "atlanta" beats "la"
    inside "chineseinatlanta"; no hit means Unspecified.
    """
    name = domain.lower()
    for kw, state in sorted(geo_lexicon.entries, key=lambda e: (-len(e[0]), e[0])):
        if kw in name:
            return state
    return UNSPECIFIED


def job_attributes(
    record: AdRecord, location_lexicon: KeywordMap, industry_lexicon: KeywordMap
) -> tuple[str, str]:
    """(claimed job state, industry) from the ad text, lexicon order first."""
    text = (record.title + "\n" + record.body).lower()
    job_loc = UNKNOWN
    for kw, state in location_lexicon.entries:
        if _keyword_hit(text, kw):
            job_loc = state
            break
    industry = "uncategorized"
    for kw, label in industry_lexicon.entries:
        if _keyword_hit(text, kw):
            industry = label
            break
    return job_loc, industry


def phone_location(phone: NormalizedPhone, areacode_table: dict[str, str]) -> str:
    return areacode_table.get(phone.digits[:3], UNKNOWN)


def load_area_codes(path: str | Path) -> dict[str, str]:
    """CSV ``code,state``; a header row is tolerated."""
    table: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or not row[0].strip():
                continue
            code, state = row[0].strip(), row[1].strip()
            if not code.isdigit():
                continue  # header
            table[code] = state
    return table


def gender_preference(text: str) -> str:
    """Rule-based gender preference: Couple > Female-only / Male-only."""
    lower = text.lower()
    if any(_keyword_hit(lower, kw) for kw in COUPLE_KEYWORDS):
        return GENDER_COUPLE
    female = any(_keyword_hit(lower, kw) for kw in FEMALE_KEYWORDS)
    male = any(_keyword_hit(lower, kw) for kw in MALE_KEYWORDS)
    if female and not male:
        return GENDER_FEMALE
    if male and not female:
        return GENDER_MALE
    return GENDER_UNSPECIFIED


def contact_methods(record: AdRecord) -> tuple[frozenset[str], str]:
    """Detected contact channels and the first-mentioned (primary) one."""
    text = record.title + "\n" + record.body
    lower = text.lower()
    positions: dict[str, int] = {}

    if record.phones:
        phone_pos = min(
            (text.find(p.raw) for p in record.phones if text.find(p.raw) >= 0),
            default=None,
        )
        if phone_pos is None:
            # Phones known but raw form not present in this text; still a
            # phone contact, just ranked last for primacy.
            phone_pos = len(text)
        positions[METHOD_PHONE] = phone_pos

    m = EMAIL_RE.search(text)
    if m:
        positions[METHOD_EMAIL] = m.start()

    for method, keywords in (
        (METHOD_WECHAT, WECHAT_KEYWORDS),
        (METHOD_OTHER_IM, OTHER_IM_KEYWORDS),
        (METHOD_IN_PERSON, IN_PERSON_KEYWORDS),
    ):
        hits = [p for p in (_keyword_position(lower, kw) for kw in keywords) if p is not None]
        if hits:
            positions[method] = min(hits)

    if not positions:
        return frozenset(), UNSPECIFIED
    primary = min(positions.items(), key=lambda kv: (kv[1], kv[0]))[0]
    return frozenset(positions), primary


def _unknownish(value: str) -> bool:
    return value in (UNSPECIFIED, UNKNOWN)


def match_category(domain_loc: str, job_loc: str, phone_loc: str) -> str:
    """Classify agreement of the three location signals (total, 12-way)."""
    d_unk = _unknownish(domain_loc)
    j_unk = _unknownish(job_loc)
    p_unk = _unknownish(phone_loc)
    n_unknown = d_unk + j_unk + p_unk
    if n_unknown >= 2:
        return NOT_COMPARABLE
    if n_unknown == 1:
        if d_unk:
            return DOMAIN_LOC_UNSPEC_MATCH if job_loc == phone_loc else DOMAIN_LOC_UNSPEC_MISMATCH
        if p_unk:
            return PHONE_LOC_UNKNOWN_MATCH if domain_loc == job_loc else PHONE_LOC_UNKNOWN_MISMATCH
        return JOB_LOC_UNKNOWN_MATCH if domain_loc == phone_loc else JOB_LOC_UNKNOWN_MISMATCH
    if domain_loc == job_loc == phone_loc:
        return ALL_MATCH
    if domain_loc != job_loc and job_loc != phone_loc and domain_loc != phone_loc:
        return ALL_MISMATCH
    if job_loc == phone_loc:
        return DOMAIN_LOC_MISMATCH
    if domain_loc == phone_loc:
        return JOB_LOC_MISMATCH
    return PHONE_LOC_MISMATCH


def extract_attributes(
    record: AdRecord,
    geo_lexicon: KeywordMap,
    location_lexicon: KeywordMap,
    industry_lexicon: KeywordMap,
    areacode_table: dict[str, str],
) -> AttributeRecord:
    job_loc, industry = job_attributes(record, location_lexicon, industry_lexicon)
    phone_loc = UNKNOWN
    for phone in sorted(record.phones, key=lambda p: p.digits):
        state = phone_location(phone, areacode_table)
        if state != UNKNOWN:
            phone_loc = state
            break
    methods, primary = contact_methods(record)
    return AttributeRecord(
        id=record.id,
        domain_loc=domain_location(record.domain, geo_lexicon),
        job_loc=job_loc,
        phone_loc=phone_loc,
        gender=gender_preference(record.title + "\n" + record.body),
        industry=industry,
        contact_methods=methods,
        primary_contact=primary,
    )


@dataclass
class DimensionRow:
    total: int = 0
    risky: int = 0

    @property
    def safe(self) -> int:
        return self.total - self.risky


@dataclass
class CharacterizationReport:
    dimensions: dict[str, dict[str, DimensionRow]]
    match_table: dict[str, DimensionRow]
    n_total: int
    n_risky: int
    pca_coords: list[tuple[int, float, float, str]] = field(default_factory=list)

    def to_json(self) -> dict:
        doc: dict = {"n_total": self.n_total, "n_risky": self.n_risky, "dimensions": {}}
        for dim, rows in self.dimensions.items():
            total_risky = sum(r.risky for r in rows.values())
            total_safe = sum(r.safe for r in rows.values())
            table = {}
            for value, row in sorted(rows.items()):
                entry = {
                    "total": row.total,
                    "risky": row.risky,
                    "safe": row.safe,
                    "risk_rate_pct": _pct(row.risky, row.total),
                    "risky_share_pct": _pct(row.risky, total_risky),
                    "safe_share_pct": _pct(row.safe, total_safe),
                }
                if dim == "industry" and value == FLAGGED_INDUSTRY:
                    entry["flagged"] = "excluded_from_deception_analysis"
                table[value] = entry
            doc["dimensions"][dim] = table
        risky_total = sum(r.risky for r in self.match_table.values())
        safe_total = sum(r.safe for r in self.match_table.values())
        doc["match_categories"] = {
            cat: {
                "safe": row.safe,
                "risky": row.risky,
                "safe_pct": _pct(row.safe, safe_total),
                "risky_pct": _pct(row.risky, risky_total),
            }
            for cat, row in self.match_table.items()
        }
        return doc

    def write(self, out_dir: str | Path) -> list[Path]:
        """Emit report.json plus one CSV per table (and the PCA scatter)."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        doc = self.to_json()
        written = []

        json_path = out_dir / "report.json"
        with open(json_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True, ensure_ascii=False)
            fh.write("\n")
        written.append(json_path)

        for dim, table in doc["dimensions"].items():
            path = out_dir / f"{dim}.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(
                    ["value", "total", "risky", "safe", "risk_rate_pct",
                     "risky_share_pct", "safe_share_pct", "flag"]
                )
                for value, row in table.items():
                    w.writerow(
                        [value, row["total"], row["risky"], row["safe"],
                         row["risk_rate_pct"], row["risky_share_pct"],
                         row["safe_share_pct"], row.get("flagged", "")]
                    )
            written.append(path)

        path = out_dir / "match_categories.csv"
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["category", "safe", "risky", "safe_pct", "risky_pct"])
            for cat in MATCH_CATEGORIES:
                row = doc["match_categories"][cat]
                w.writerow([cat, row["safe"], row["risky"], row["safe_pct"], row["risky_pct"]])
        written.append(path)

        if self.pca_coords:
            path = out_dir / "pca_scatter.csv"
            with open(path, "w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["id", "pc1", "pc2", "label"])
                for ad_id, pc1, pc2, label in self.pca_coords:
                    w.writerow([ad_id, repr(pc1), repr(pc2), label])
            written.append(path)
        return written


def _pct(num: int, den: int) -> float:
    return round(100.0 * num / den, 4) if den else 0.0


def report(
    attributes: list[AttributeRecord],
    final_labels: dict[int, object],
    pca_coords: list[tuple[int, float, float]] | None = None,
) -> CharacterizationReport:
    """Aggregate attribute counts split by final label.

    Every attribute id must be labeled.  ``pca_coords`` rows (id, pc1,
    pc2) are passed through to the scatter CSV with the label attached.
    """
    dims = ("domain_loc", "job_loc", "phone_loc", "gender", "industry", "primary_contact")
    tables: dict[str, dict[str, DimensionRow]] = {d: {} for d in dims}
    match_table: dict[str, DimensionRow] = {c: DimensionRow() for c in MATCH_CATEGORIES}
    n_risky = 0
    labeled: dict[int, bool] = {}
    for attr in attributes:
        if attr.id not in final_labels:
            raise KeyError(f"attribute record {attr.id} has no final label")
        lab = final_labels[attr.id]
        risky = getattr(lab, "label", lab) == RISKY
        labeled[attr.id] = risky
        n_risky += int(risky)
        for dim in dims:
            value = getattr(attr, dim)
            row = tables[dim].setdefault(value, DimensionRow())
            row.total += 1
            row.risky += int(risky)
        cat = match_category(attr.domain_loc, attr.job_loc, attr.phone_loc)
        match_table[cat].total += 1
        match_table[cat].risky += int(risky)

    coords = []
    if pca_coords:
        for ad_id, pc1, pc2 in pca_coords:
            if ad_id in labeled:
                coords.append((ad_id, float(pc1), float(pc2), RISKY if labeled[ad_id] else "Safe"))
    return CharacterizationReport(
        dimensions=tables,
        match_table=match_table,
        n_total=len(attributes),
        n_risky=n_risky,
        pca_coords=coords,
    )
