import json

import numpy as np
import pytest

from embadapter.backends import HashBackend, ModelLoadError, make_backend, tokenize
from embadapter.embed import AdapterConfig, CorpusError, embed_corpus, read_scrubbed_corpus


def write_corpus(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def three_doc_rows():
    return [
        {"id": 1, "scrubbed_title": "cook wanted", "scrubbed_body": "restaurant line cook, $18/hr, call <PHONE>"},
        {"id": 2, "scrubbed_title": "办公室助理", "scrubbed_body": "前台 接待 工资面议 微信联系"},
        {"id": 3, "scrubbed_title": "", "scrubbed_body": "работа в нью-йорке, высокая зарплата"},
    ]


class RecordingBackend:
    """Wraps HashBackend and records every batch size it receives."""

    def __init__(self, dim=8, max_tokens=4096):
        self.inner = HashBackend(dim=dim, max_tokens=max_tokens)
        self.dim = dim
        self.batches = []

    def encode(self, texts):
        self.batches.append(len(texts))
        return self.inner.encode(texts)


class TestReadCorpus:
    def test_reads_scrubbed_fields_only(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus(path, [{"id": 5, "title": "RAW 2125550001", "scrubbed_title": "safe",
                             "scrubbed_body": "text", "body": "RAW"}])
        rows = read_scrubbed_corpus(path)
        assert rows == [(5, "safe\ntext")]

    def test_unscrubbed_corpus_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus(path, [{"id": 1, "body": "raw only"}])
        with pytest.raises(CorpusError, match="scrubbed"):
            read_scrubbed_corpus(path)

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus(path, [{"id": 1, "scrubbed_body": "a"}, {"id": 1, "scrubbed_body": "b"}])
        with pytest.raises(CorpusError, match="duplicate"):
            read_scrubbed_corpus(path)


class TestEmbedCorpus:
    def test_batch_size_two_honored(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus(path, three_doc_rows())
        backend = RecordingBackend()
        config = AdapterConfig(model="hash:8", input_path=str(path),
                               output_path=str(tmp_path / "o.emb1"), batch_size=2)
        n = embed_corpus(config, backend=backend)
        assert n == 3
        assert backend.batches == [2, 1]

    def test_truncation_at_max_tokens(self, tmp_path):
        base = ["tok%d" % i for i in range(4096)]
        same_prefix = " ".join(base + ["extra", "tail", "alpha"])
        other_tail = " ".join(base + ["completely", "different", "words"])
        differs_inside = " ".join(["CHANGED"] + base[1:])
        backend = HashBackend(dim=32, max_tokens=4096)
        va, vb, vc = backend.encode([same_prefix, other_tail, differs_inside])
        assert np.array_equal(va, vb)  # tails beyond 4096 tokens are ignored
        assert not np.array_equal(va, vc)

    def test_scrubbed_vs_unscrubbed_vectors_differ(self, tmp_path):
        scrubbed = tmp_path / "s.jsonl"
        unscrubbed = tmp_path / "u.jsonl"
        write_corpus(scrubbed, [{"id": 1, "scrubbed_body": "call <PHONE> today"}])
        # Same ad before scrubbing (digits still present).
        write_corpus(unscrubbed, [{"id": 1, "scrubbed_body": "call 7702413449 today"}])
        va = tmp_path / "a.emb1"
        vb = tmp_path / "b.emb1"
        embed_corpus(AdapterConfig("hash:64", str(scrubbed), str(va)))
        embed_corpus(AdapterConfig("hash:64", str(unscrubbed), str(vb)))
        assert va.read_bytes() != vb.read_bytes()

    def test_deterministic_output(self, tmp_path):
        path = tmp_path / "c.jsonl"
        write_corpus(path, three_doc_rows())
        a, b = tmp_path / "a.emb1", tmp_path / "b.emb1"
        embed_corpus(AdapterConfig("hash:16", str(path), str(a)))
        embed_corpus(AdapterConfig("hash:16", str(path), str(b)))
        assert a.read_bytes() == b.read_bytes()

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AdapterConfig(model="hash:8", input_path="x", output_path="y", batch_size=0)
        with pytest.raises(ValueError):
            AdapterConfig(model="hash:8", input_path="x", output_path="y", max_tokens=0)


class TestBackends:
    def test_tokenizer_keeps_placeholder_and_cjk(self):
        toks = tokenize("Call <PHONE> 按摩 now")
        assert "<phone>" in toks and "按" in toks and "摩" in toks

    def test_make_backend_hash(self):
        b = make_backend("hash:123", max_tokens=10)
        assert b.dim == 123 and b.max_tokens == 10

    def test_unknown_model_rejected(self):
        with pytest.raises(ModelLoadError):
            make_backend("magic:thing", max_tokens=10)

    def test_rows_unit_normalized(self):
        backend = HashBackend(dim=16)
        vecs = backend.encode(["some words here", ""])
        assert np.linalg.norm(vecs[0]) == pytest.approx(1.0, abs=1e-6)
        assert np.linalg.norm(vecs[1]) == 0.0
