"""Bit-exact embedding storage (EMB1) and label joining.

EMB1 layout: one ASCII header line ``EMB1 <count> <dim>\\n`` followed by
``count`` records of an 8-byte little-endian unsigned id and ``dim``
little-endian IEEE-754 float32 values.  The format is the interchange
contract with whatever produces the embeddings, so reads and writes are
byte-stable across platforms.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class Emb1Error(Exception):
    pass


class Emb1HeaderError(Emb1Error):
    pass


class Emb1TruncatedError(Emb1Error):
    pass


class Emb1ValueError(Emb1Error):
    """Payload contains NaN/Inf or duplicate ids."""


class MissingIdError(KeyError):
    pass


@dataclass
class EmbeddingMatrix:
    ids: list[int]
    data: np.ndarray  # float32, shape (len(ids), dim)

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise ValueError("data must be a 2-D array")
        if self.data.shape[0] != len(self.ids):
            raise ValueError("row count does not match id count")
        if self.data.shape[1] < 1:
            raise ValueError("dim must be >= 1")
        if len(set(self.ids)) != len(self.ids):
            raise Emb1ValueError("duplicate ids in embedding matrix")
        if not np.all(np.isfinite(self.data)):
            raise Emb1ValueError("embedding matrix contains NaN or Inf")

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def __len__(self) -> int:
        return len(self.ids)


def write_emb1(matrix: EmbeddingMatrix, path: str | Path) -> None:
    n, dim = len(matrix), matrix.dim
    row_dt = np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])
    rows = np.empty(n, dtype=row_dt)
    rows["id"] = np.asarray(matrix.ids, dtype=np.uint64)
    rows["vec"] = matrix.data
    with open(path, "wb") as fh:
        fh.write(f"EMB1 {n} {dim}\n".encode("ascii"))
        fh.write(rows.tobytes())


def read_emb1(path: str | Path) -> EmbeddingMatrix:
    with open(path, "rb") as fh:
        header = fh.readline(128)
        m = re.fullmatch(rb"EMB1 (\d+) (\d+)\n", header)
        if not m:
            raise Emb1HeaderError(f"bad EMB1 header: {header[:40]!r}")
        n, dim = int(m.group(1)), int(m.group(2))
        if dim < 1:
            raise Emb1HeaderError("dim must be >= 1")
        payload = fh.read()
    row_dt = np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])
    expected = n * row_dt.itemsize
    if len(payload) != expected:
        raise Emb1TruncatedError(
            f"payload is {len(payload)} bytes, header promises {expected}"
        )
    rows = np.frombuffer(payload, dtype=row_dt)
    ids = [int(i) for i in rows["id"]]
    data = rows["vec"].reshape(n, dim).copy()
    if not np.all(np.isfinite(data)):
        raise Emb1ValueError("embedding file contains NaN or Inf")
    if len(set(ids)) != len(ids):
        raise Emb1ValueError("embedding file contains duplicate ids")
    return EmbeddingMatrix(ids=ids, data=data)


def emb1_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class JoinResult:
    X: np.ndarray
    y: np.ndarray  # 0 = Safe, 1 = Risky
    ids: list[int]
    missing_ids: list[int] = field(default_factory=list)


def join(
    matrix: EmbeddingMatrix,
    labels: dict[int, object] | list[tuple[int, object]],
    allow_missing: bool = False,
) -> JoinResult:
    """Align embedding rows with a label file.

    Row order follows the label order exactly.  Labels may be RiskLabel
    objects, "Safe"/"Risky" strings, or 0/1 ints.  A labeled id absent
    from the matrix is an error unless ``allow_missing``, in which case
    the row is dropped and reported.
    """
    items = labels.items() if isinstance(labels, dict) else labels
    index = {ad_id: i for i, ad_id in enumerate(matrix.ids)}
    rows, ys, ids, missing = [], [], [], []
    for ad_id, lab in items:
        pos = index.get(ad_id)
        if pos is None:
            if allow_missing:
                missing.append(ad_id)
                continue
            raise MissingIdError(f"id {ad_id} has a label but no embedding row")
        rows.append(pos)
        ys.append(_label_to_int(lab))
        ids.append(ad_id)
    X = matrix.data[rows] if rows else np.empty((0, matrix.dim), dtype=np.float32)
    return JoinResult(X=X, y=np.asarray(ys, dtype=np.int64), ids=ids, missing_ids=missing)


def _label_to_int(lab) -> int:
    value = getattr(lab, "label", lab)
    if value in (0, 1):
        return int(value)
    if value == "Safe":
        return 0
    if value == "Risky":
        return 1
    raise ValueError(f"unrecognized label: {lab!r}")


_TOKEN_RE = re.compile(r"[a-z0-9<>$+]+|[㐀-䶿一-鿿]")


def hash_embeddings(
    texts: list[tuple[int, str]], dim: int = 64, seed: int = 42
) -> EmbeddingMatrix:
    """Deterministic hashed bag-of-tokens pseudo-embeddings.

    Each token is mapped by keyed BLAKE2b to a coordinate and a sign
    (a sparse random projection), accumulated, and the row L2-normalized.
    Platform-independent: no RNG state, only the hash function.
    Stands in for model embeddings in tests and synthetic end-to-end runs.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    key = b"adrisk-hash-emb:" + int(seed).to_bytes(8, "little")
    ids = [t[0] for t in texts]
    data = np.zeros((len(texts), dim), dtype=np.float64)
    for row, (_, text) in enumerate(texts):
        for token in _TOKEN_RE.findall(text.lower()):
            digest = hashlib.blake2b(token.encode("utf-8"), key=key, digest_size=9).digest()
            idx = int.from_bytes(digest[:8], "little") % dim
            sign = 1.0 if digest[8] & 1 else -1.0
            data[row, idx] += sign
        norm = np.linalg.norm(data[row])
        if norm > 0:
            data[row] /= norm
    return EmbeddingMatrix(ids=ids, data=data.astype(np.float32))
