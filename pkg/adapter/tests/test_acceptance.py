"""Adapter acceptance: the EMB1 contract with the consuming pipeline."""

import json
from contextlib import contextmanager

import numpy as np
import pytest

from embadapter.backends import HashBackend
from embadapter.cli import main
from embadapter.embed import AdapterConfig, embed_corpus


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"\n[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"\n[ACCEPTANCE] {name}: PASS")


def write_corpus(path, rows):
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")


def test_adapter_contract(tmp_path):
    """3-document corpus -> valid EMB1 (header, byte length, no NaN) that
    round-trips through the primary reader; batch size 2 and 4096-token
    truncation honored."""
    with criterion("adapter-contract"):
        corpus = tmp_path / "corpus.jsonl"
        rows = [
            {"id": 11, "scrubbed_title": "cook wanted", "scrubbed_body": "call <PHONE> now"},
            {"id": 22, "scrubbed_title": "前台", "scrubbed_body": "微信联系 工资面议"},
            {"id": 33, "scrubbed_title": "", "scrubbed_body": "высокая зарплата"},
        ]
        write_corpus(corpus, rows)
        out = tmp_path / "corpus.emb1"

        class Recording(HashBackend):
            batches = []

            def encode(self, texts):
                Recording.batches.append(len(texts))
                return super().encode(texts)

        backend = Recording(dim=48, max_tokens=4096)
        config = AdapterConfig(
            model="hash:48", input_path=str(corpus), output_path=str(out),
            batch_size=2, max_tokens=4096,
        )
        n = embed_corpus(config, backend=backend)
        assert n == 3
        assert Recording.batches == [2, 1]  # batch size 2 honored

        blob = out.read_bytes()
        header = b"EMB1 3 48\n"
        assert blob.startswith(header)
        assert len(blob) == len(header) + 3 * (8 + 4 * 48)  # exact byte length

        # Round-trip through the primary pipeline's reader.
        from adrisk.embedstore import read_emb1

        matrix = read_emb1(out)
        assert matrix.ids == [11, 22, 33]
        assert matrix.dim == 48
        assert np.all(np.isfinite(matrix.data))
        direct = backend.encode(
            [r["scrubbed_title"] + "\n" + r["scrubbed_body"] for r in rows]
        )
        assert np.array_equal(matrix.data, direct)

        # 4096-token truncation: text past the limit cannot move the vector.
        prefix = " ".join(f"t{i}" for i in range(4096))
        vec_a, vec_b = backend.encode([prefix + " ignored tail", prefix + " other words"])
        assert np.array_equal(vec_a, vec_b)


def test_cli_embed_end_to_end(tmp_path):
    with criterion("adapter-cli"):
        corpus = tmp_path / "corpus.jsonl"
        write_corpus(corpus, [{"id": 1, "scrubbed_body": "some scrubbed text <PHONE>"}])
        out = tmp_path / "o.emb1"
        assert main([
            "embed", "--model", "hash:16", "--batch-size", "2",
            "--max-tokens", "4096", "--in", str(corpus), "--out", str(out),
        ]) == 0
        from adrisk.embedstore import read_emb1

        assert read_emb1(out).dim == 16

        preds = tmp_path / "p.jsonl"
        assert main([
            "predict", "--model", "rules", "--in", str(corpus), "--out", str(preds),
        ]) == 0
        assert preds.read_text().strip()

        with pytest.raises(SystemExit) as exc:
            main(["embed", "--in", str(tmp_path / "missing.jsonl"), "--out", str(out)])
        assert exc.value.code == 3
