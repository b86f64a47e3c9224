"""EMB1 writer: the file contract with the consuming pipeline.

Layout: ASCII header ``EMB1 <count> <dim>\\n``, then per record an
8-byte little-endian unsigned id followed by dim little-endian float32
values.  Bit-exact and seekable by design.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


class Emb1WriteError(ValueError):
    pass


def write_emb1(ids: list[int], data: np.ndarray, path: str | Path) -> None:
    data = np.ascontiguousarray(data, dtype="<f4")
    if data.ndim != 2 or data.shape[0] != len(ids):
        raise Emb1WriteError("data must be (len(ids), dim)")
    if data.shape[1] < 1:
        raise Emb1WriteError("dim must be >= 1")
    if len(set(ids)) != len(ids):
        raise Emb1WriteError("duplicate ids")
    if not np.all(np.isfinite(data)):
        raise Emb1WriteError("non-finite embedding values")
    n, dim = data.shape
    row_dt = np.dtype([("id", "<u8"), ("vec", "<f4", (dim,))])
    rows = np.empty(n, dtype=row_dt)
    rows["id"] = np.asarray(ids, dtype=np.uint64)
    rows["vec"] = data
    with open(path, "wb") as fh:
        fh.write(f"EMB1 {n} {dim}\n".encode("ascii"))
        fh.write(rows.tobytes())
