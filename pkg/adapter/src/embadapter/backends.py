"""Embedding backends.

``hash:<dim>`` is a dependency-free deterministic embedder (keyed token
hashing into a signed coordinate, L2-normalized); it keeps the full
pipeline runnable offline and is the backend the tests exercise.
``st:<model-id>`` loads a pretrained multilingual model through
sentence-transformers; the model cache directory can be pointed at a
shared volume with the EMB_ADAPTER_CACHE environment variable.
"""

from __future__ import annotations

import hashlib
import os
import re

import numpy as np

CACHE_ENV_VAR = "EMB_ADAPTER_CACHE"

_TOKEN_RE = re.compile(r"[a-z0-9<>$+@._-]+|[㐀-䶿一-鿿]")


class ModelLoadError(RuntimeError):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class HashBackend:
    """Signed feature hashing of the first max_tokens tokens."""

    def __init__(self, dim: int = 1024, max_tokens: int = 4096, seed: int = 42):
        if dim < 1:
            raise ModelLoadError(f"hash backend dim must be >= 1, got {dim}")
        self.dim = dim
        self.max_tokens = max_tokens
        self._key = b"emb-adapter-hash:" + int(seed).to_bytes(8, "little")

    def encode(self, texts: list[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            for token in tokenize(text)[: self.max_tokens]:
                digest = hashlib.blake2b(
                    token.encode("utf-8"), key=self._key, digest_size=9
                ).digest()
                idx = int.from_bytes(digest[:8], "little") % self.dim
                out[row, idx] += 1.0 if digest[8] & 1 else -1.0
            norm = np.linalg.norm(out[row])
            if norm > 0:
                out[row] /= norm
        return out.astype(np.float32)


class SentenceTransformerBackend:
    """Pretrained multilingual embedding model (lazy heavyweight import)."""

    def __init__(self, model_id: str, max_tokens: int = 4096):
        cache = os.environ.get(CACHE_ENV_VAR)
        if cache:
            os.environ.setdefault("SENTENCE_TRANSFORMERS_HOME", cache)
            os.environ.setdefault("HF_HOME", cache)
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise ModelLoadError(
                "sentence-transformers is not installed; install the 'st' extra"
            ) from exc
        try:
            self.model = SentenceTransformer(model_id)
        except Exception as exc:
            raise ModelLoadError(f"cannot load model {model_id!r}: {exc}") from exc
        self.model.max_seq_length = max_tokens
        self.dim = int(self.model.get_sentence_embedding_dimension())
        self.max_tokens = max_tokens

    def encode(self, texts: list[str]) -> np.ndarray:
        vecs = self.model.encode(texts, batch_size=len(texts), convert_to_numpy=True)
        return np.asarray(vecs, dtype=np.float32)


def make_backend(model: str, max_tokens: int):
    """Resolve a model identifier: ``hash:<dim>`` or ``st:<model-id>``."""
    if model.startswith("hash:"):
        return HashBackend(dim=int(model.split(":", 1)[1]), max_tokens=max_tokens)
    if model == "hash":
        return HashBackend(max_tokens=max_tokens)
    if model.startswith("st:"):
        return SentenceTransformerBackend(model.split(":", 1)[1], max_tokens=max_tokens)
    raise ModelLoadError(f"unknown model identifier: {model!r}")
