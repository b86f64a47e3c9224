"""Corpus embedding: scrubbed JSONL in, EMB1 out."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backends import make_backend
from .emb1 import write_emb1


class CorpusError(ValueError):
    pass


@dataclass(frozen=True)
class AdapterConfig:
    model: str
    input_path: str
    output_path: str
    batch_size: int = 2
    max_tokens: int = 4096

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")


def read_scrubbed_corpus(path: str | Path) -> list[tuple[int, str]]:
    """(id, scrubbed text) pairs from the canonical corpus JSONL.

    Only the scrubbed fields are read; a row without scrubbed_body is a
    contract violation (the adapter must never see raw phone digits),
    and duplicate ids are rejected.
    """
    rows: list[tuple[int, str]] = []
    seen: set[int] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            if "id" not in obj:
                raise CorpusError(f"line {line_no}: missing id")
            if "scrubbed_body" not in obj:
                raise CorpusError(f"line {line_no}: corpus is not scrubbed (no scrubbed_body)")
            ad_id = int(obj["id"])
            if ad_id in seen:
                raise CorpusError(f"line {line_no}: duplicate id {ad_id}")
            seen.add(ad_id)
            text = (obj.get("scrubbed_title") or "") + "\n" + obj["scrubbed_body"]
            rows.append((ad_id, text))
    return rows


def embed_corpus(config: AdapterConfig, backend=None) -> int:
    """Embed every ad and write the EMB1 file; returns the row count."""
    rows = read_scrubbed_corpus(config.input_path)
    if backend is None:
        backend = make_backend(config.model, config.max_tokens)
    ids = [r[0] for r in rows]
    texts = [r[1] for r in rows]
    chunks = []
    for start in range(0, len(texts), config.batch_size):
        batch = texts[start : start + config.batch_size]
        chunks.append(np.asarray(backend.encode(batch), dtype=np.float32))
    data = (
        np.concatenate(chunks, axis=0)
        if chunks
        else np.empty((0, backend.dim), dtype=np.float32)
    )
    write_emb1(ids, data, config.output_path)
    return len(ids)
