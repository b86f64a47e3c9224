"""External prediction files from a prompted classification model.

A client is anything with ``classify(text) -> str`` returning the raw
model reply; replies must be JSON of the form
``{"label": "SAFE" | "RISKY", "reason": "..."}``.  Non-JSON replies are
recorded as abstentions (the ad is omitted from the output file and
listed in a sidecar report) rather than crashing the batch.

The built-in ``rules`` client is a deterministic stand-in that applies
the few-shot decision rules directly, so the full pipeline can run
offline; point ``HttpJsonClient`` at any OpenAI-style completion
endpoint for a real model (temperature 0).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

PROMPT_TEMPLATE = (
    "You are a professional job-risk analysis expert. Evaluate whether the "
    "following job posting is SAFE or RISKY. Respond strictly in JSON format: "
    '{{"label": "SAFE" or "RISKY", "reason": "<short, clear reason>"}}\n\n'
    "Post: {post}"
)

PAY_WORDS = ("salary", "wage", "pay", "income", "earn", "hourly", "monthly", "工资", "月薪", "时薪")
VAGUE_DUTY_MARKERS = (
    "easy work", "flexible duties", "no experience", "simple work", "light work",
    "collaborate", "easy visa", "轻松", "无需经验",
)
URGENCY_MARKERS = (
    "act now", "start today", "urgent", "immediately", "limited spots",
    "guaranteed", "financial freedom", "急聘", "马上",
)
EMPLOYER_MARKERS = ("inc", "llc", "company", "restaurant", "hr", "human resources", "公司")

EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")
PHONEISH_RE = re.compile(r"(?:\d[\s().+-]*){10,}|<PHONE>")
MONEY_FIGURE_RE = re.compile(r"\$\s*\d+(?:[.,]\d+)?(?:\s*/\s*(?:hr|hour|h))?")


class RulesClient:
    """Deterministic few-shot-rules classifier emitting model-style JSON."""

    name = "fewshot_rules"

    def classify(self, text: str) -> str:
        lower = text.lower()
        signals = []
        has_email = bool(EMAIL_RE.search(lower))
        has_employer = any(m in lower for m in EMPLOYER_MARKERS)
        phone_only = bool(PHONEISH_RE.search(lower)) and not has_email
        if phone_only and not has_employer:
            signals.append("phone/IM-only contact with no employer identity")
        concrete_pay = bool(MONEY_FIGURE_RE.search(lower)) and any(
            w in lower for w in PAY_WORDS
        )
        if not concrete_pay or "discuss in person" in lower:
            signals.append("compensation unclear or absent")
        if any(m in lower for m in VAGUE_DUTY_MARKERS):
            signals.append("vague or non-standard duties")
        if any(m in lower for m in URGENCY_MARKERS):
            signals.append("unrealistic claims or urgency pressure")
        label = "RISKY" if len(signals) >= 2 else "SAFE"
        reason = "; ".join(signals) if signals else "normal job details present"
        return json.dumps({"label": label, "reason": reason, "signals": len(signals)})


class HttpJsonClient:
    """POSTs the prompt to an OpenAI-style endpoint; deterministic (t=0)."""

    name = "llm_http"

    def __init__(self, endpoint: str, model: str, timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.timeout = timeout

    def classify(self, text: str) -> str:
        import urllib.request

        payload = json.dumps(
            {
                "model": self.model,
                "temperature": 0,
                "messages": [
                    {"role": "user", "content": PROMPT_TEMPLATE.format(post=text)}
                ],
            }
        ).encode("utf-8")
        req = urllib.request.Request(
            self.endpoint, data=payload, headers={"Content-Type": "application/json"}
        )
        with urllib.request.urlopen(req, timeout=self.timeout) as resp:
            doc = json.loads(resp.read().decode("utf-8"))
        return doc["choices"][0]["message"]["content"]


@dataclass
class PredictionRun:
    predictions: list[dict] = field(default_factory=list)
    abstained: list[int] = field(default_factory=list)


def _score_for(label: str, signals: int | None) -> float:
    """Map a vote (and optional signal count) onto the score scale the
    downstream threshold expects: > 0.5 iff Risky."""
    if label == "Risky":
        return max(0.55, min(1.0, (signals or 3) / 4)) if signals is not None else 0.75
    return min(0.45, (signals or 0) / 4) if signals is not None else 0.25


def classify_corpus(rows: list[tuple[int, str]], client, model_name: str | None = None) -> PredictionRun:
    run = PredictionRun()
    name = model_name or getattr(client, "name", "external_model")
    for ad_id, text in rows:
        reply = client.classify(text)
        try:
            doc = json.loads(reply)
            raw_label = str(doc["label"]).strip().upper()
            if raw_label not in ("SAFE", "RISKY"):
                raise ValueError(f"unexpected label {raw_label!r}")
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            run.abstained.append(ad_id)
            continue
        label = "Risky" if raw_label == "RISKY" else "Safe"
        signals = doc.get("signals") if isinstance(doc, dict) else None
        run.predictions.append(
            {
                "id": ad_id,
                "score": _score_for(label, signals),
                "label": label,
                "model_name": name,
            }
        )
    return run


def write_prediction_run(run: PredictionRun, path: str | Path, report_path: str | Path | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in run.predictions:
            fh.write(json.dumps(row, sort_keys=True))
            fh.write("\n")
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(
                {"abstained": sorted(run.abstained), "count": len(run.abstained)}, fh
            )
            fh.write("\n")
