"""Command-line pipeline: composable, file-based stages.

Every stage reads and writes only the documented formats (JSONL, TOML,
CSV, EMB1) so externally produced prediction files can be injected
before ``ensemble``.  Exit codes: 0 success, 2 usage, 3 missing file,
4 schema/validation error, 1 anything else; failures print a one-line
JSON object to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path

import numpy as np
import tomli

from . import characterize as chz
from . import corpus as corpus_mod
from . import embedstore, ensemble, evalkit, labelnet, sampler, synthgen
from .learners import (
    fit_gbt,
    load_model,
    pca_project,
    predict as predict_rows,
    save_model,
    train_ffnn,
    train_gbt,
    train_logreg,
    write_predictions,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_SCHEMA = 4
EXIT_OTHER = 1

DEFAULT_SEED = 42


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        self.exit(EXIT_USAGE)


def _data_path(name: str) -> Path:
    return Path(str(resources.files("adrisk.data").joinpath(name)))


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "rb") as fh:
        return tomli.load(fh)


def _opt(args, cfg: dict, name: str, default=None):
    """CLI flag wins; then the command's config section; then the default."""
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in cfg:
        return cfg[name]
    return cfg.get(name.replace("-", "_"), default)


def _read_labels_resolved(path: str) -> dict[int, labelnet.RiskLabel]:
    return labelnet.read_labels(path)


def _manifest_ids(path: str | None) -> list[int] | None:
    if not path:
        return None
    return [int(row["id"]) for row in sampler.read_manifest(path)]


def _train_matrix(args, cfg):
    matrix = embedstore.read_emb1(_opt(args, cfg, "emb"))
    labels = _read_labels_resolved(_opt(args, cfg, "labels"))
    ids = _manifest_ids(_opt(args, cfg, "manifest"))
    if ids is not None:
        labels = {i: labels[i] for i in ids}
    joined = embedstore.join(matrix, labels, allow_missing=False)
    return joined


# ---------------------------------------------------------------- commands


def cmd_ingest(args, cfg):
    records, report = corpus_mod.ingest(_opt(args, cfg, "in"))
    if _opt(args, cfg, "dedup", False):
        records = corpus_mod.dedup(records)
    corpus_mod.write_corpus(records, _opt(args, cfg, "out"))
    report_path = _opt(args, cfg, "report")
    doc = {
        "path": report.path,
        "total_lines": report.total_lines,
        "accepted": report.accepted,
        "errors": [{"line": e.line_no, "reason": e.reason} for e in report.errors],
    }
    if report_path:
        with open(report_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    print(json.dumps({"accepted": report.accepted, "rejected": len(report.errors)}))
    return EXIT_OK


def cmd_filter(args, cfg):
    records = corpus_mod.read_corpus(_opt(args, cfg, "in"))
    kept, dropped = corpus_mod.filter_domains(
        records, min_posts=int(_opt(args, cfg, "min-posts", 5))
    )
    corpus_mod.write_corpus(kept, _opt(args, cfg, "out"))
    dropped_path = _opt(args, cfg, "dropped")
    if dropped_path:
        with open(dropped_path, "w", encoding="utf-8") as fh:
            json.dump(
                [{"domain": d.name, "post_count": d.post_count} for d in dropped],
                fh,
                indent=2,
            )
            fh.write("\n")
    print(json.dumps({"kept": len(kept), "dropped_domains": len(dropped)}))
    return EXIT_OK


def cmd_label(args, cfg):
    records = corpus_mod.dedup(corpus_mod.read_corpus(_opt(args, cfg, "corpus")))
    lexicon_path = _opt(args, cfg, "lexicon") or _data_path("categories.toml")
    lexicon = corpus_mod.load_category_lexicon(lexicon_path)
    domains = corpus_mod.categorize_domains(
        corpus_mod.domains_from_records(records), lexicon
    )
    graph = labelnet.build_graph(records, domains)
    labels = labelnet.assign_labels(graph)

    augment_path = _opt(args, cfg, "augment")
    n_augmented = 0
    if augment_path:
        risky = labelnet.risky_phone_set(labels)
        known = {r.id for r in records}
        extra = [
            r for r in corpus_mod.dedup(corpus_mod.read_corpus(augment_path))
            if r.id not in known
        ]
        # Search-sourced pages with snippets must actually contain one of
        # the risk-labeled numbers in the snippet (exact match filtering).
        extra = [
            r for r in extra
            if r.snippet is None
            or any(
                corpus_mod.snippet_match(r.snippet, p)
                for p in r.phones
                if p.digits in risky
            )
        ]
        for rec, label in labelnet.augment_risky(graph, extra, risky):
            labels[rec.id] = label
            n_augmented += 1

    labelnet.write_labels(labels, _opt(args, cfg, "out"))
    domains_out = _opt(args, cfg, "domains-out")
    if domains_out:
        with open(domains_out, "w", encoding="utf-8") as fh:
            for d in domains:
                fh.write(
                    json.dumps(
                        {"domain": d.name, "category": d.category, "post_count": d.post_count}
                    )
                )
                fh.write("\n")
    n_risky = sum(1 for lab in labels.values() if lab.label == labelnet.RISKY)
    print(json.dumps({"labeled": len(labels), "risky": n_risky, "augmented": n_augmented}))
    return EXIT_OK


def cmd_sample(args, cfg):
    labels = _read_labels_resolved(_opt(args, cfg, "labels"))
    strategy = sampler.resolve_strategy(_opt(args, cfg, "strategy", sampler.BALANCED))
    seed = int(_opt(args, cfg, "seed", DEFAULT_SEED))
    sampled = sampler.sample(list(labels.items()), strategy, seed=seed)
    sampler.write_manifest(sampled, strategy, _opt(args, cfg, "out"))
    print(json.dumps({"total": len(sampled), "strategy": strategy, "seed": seed}))
    return EXIT_OK


def cmd_train(args, cfg):
    joined = _train_matrix(args, cfg)
    model_kind = _opt(args, cfg, "model")
    seed = int(_opt(args, cfg, "seed", DEFAULT_SEED))
    if model_kind == "logreg":
        model = train_logreg(joined.X, joined.y, C=float(_opt(args, cfg, "c", 1.0)))
    elif model_kind == "ffnn":
        model = train_ffnn(
            joined.X,
            joined.y,
            lr=float(_opt(args, cfg, "lr", 1e-3)),
            batch=int(_opt(args, cfg, "batch", 64)),
            max_epochs=int(_opt(args, cfg, "max-epochs", 20)),
            seed=seed,
        )
    elif model_kind == "gbt":
        grid_mode = _opt(args, cfg, "grid", "none")
        if grid_mode == "full":
            model = train_gbt(joined.X, joined.y, seed=seed)
        elif grid_mode == "small":
            small = {
                "n_trees": [100, 200],
                "max_depth": [4, 6],
                "learning_rate": [0.1],
                "subsample": [1.0],
                "colsample": [1.0],
            }
            model = train_gbt(joined.X, joined.y, grid=small, seed=seed)
        else:
            model = fit_gbt(
                joined.X,
                joined.y,
                n_trees=int(_opt(args, cfg, "n-trees", 200)),
                max_depth=int(_opt(args, cfg, "max-depth", 6)),
                learning_rate=float(_opt(args, cfg, "learning-rate", 0.1)),
                subsample=float(_opt(args, cfg, "subsample", 1.0)),
                colsample=float(_opt(args, cfg, "colsample", 1.0)),
                seed=seed,
            )
    else:
        raise ValueError(f"unknown model kind: {model_kind!r}")
    save_model(model, _opt(args, cfg, "out"))
    print(json.dumps({"model": model_kind, "rows": int(joined.X.shape[0])}))
    return EXIT_OK


def cmd_predict(args, cfg):
    model = load_model(_opt(args, cfg, "model"))
    matrix = embedstore.read_emb1(_opt(args, cfg, "emb"))
    ids = _manifest_ids(_opt(args, cfg, "ids"))
    if ids is None:
        ids = matrix.ids
        X = matrix.data
    else:
        index = {ad_id: i for i, ad_id in enumerate(matrix.ids)}
        missing = [i for i in ids if i not in index]
        if missing:
            raise embedstore.MissingIdError(f"ids missing from embeddings: {missing[:5]}")
        X = matrix.data[[index[i] for i in ids]]
    name = _opt(args, cfg, "name") or type(model).__name__.replace("Model", "").lower()
    preds = predict_rows(model, X, ids, name)
    write_predictions(preds, _opt(args, cfg, "out"))
    print(json.dumps({"predictions": len(preds), "model_name": name}))
    return EXIT_OK


def cmd_ensemble(args, cfg):
    paths = args.pred or cfg.get("pred") or []
    votes, incomplete = ensemble.load_predictions(paths)
    fused = ensemble.fuse(votes)
    preds = ensemble.ensemble_predictions(fused)
    write_predictions(preds, _opt(args, cfg, "out"))
    flag_path = _opt(args, cfg, "flag-incomplete")
    if flag_path:
        with open(flag_path, "w", encoding="utf-8") as fh:
            json.dump(sorted(incomplete), fh)
            fh.write("\n")
    print(json.dumps({"ids": len(preds), "incomplete": len(incomplete)}))
    return EXIT_OK


def cmd_evaluate(args, cfg):
    labels = _read_labels_resolved(_opt(args, cfg, "labels"))
    pred_path = _opt(args, cfg, "pred")
    seed = int(_opt(args, cfg, "seed", DEFAULT_SEED))
    if pred_path:
        from .learners import read_predictions

        preds = read_predictions(pred_path)
        labeled = [p for p in preds if p.id in labels]
        skipped = len(preds) - len(labeled)
        if skipped:
            print(f"note: {skipped} prediction(s) without a truth label ignored")
        entry = evalkit.metrics(labeled, labels)
        report = evalkit.summarize_folds([entry])
    else:
        joined = _train_matrix(args, cfg)
        model_kind = _opt(args, cfg, "model", "logreg")
        k = int(_opt(args, cfg, "folds", 5))

        def fit_score(X_tr, y_tr, X_te):
            if model_kind == "logreg":
                return train_logreg(X_tr, y_tr, C=float(_opt(args, cfg, "c", 1.0))).scores(X_te)
            if model_kind == "ffnn":
                return train_ffnn(X_tr, y_tr, seed=seed).scores(X_te)
            if model_kind == "gbt":
                return fit_gbt(
                    X_tr,
                    y_tr,
                    n_trees=int(_opt(args, cfg, "n-trees", 200)),
                    max_depth=int(_opt(args, cfg, "max-depth", 6)),
                    learning_rate=float(_opt(args, cfg, "learning-rate", 0.1)),
                    seed=seed,
                ).scores(X_te)
            raise ValueError(f"unknown model kind: {model_kind!r}")

        report = evalkit.cross_validate(
            joined.X, joined.y, joined.ids, fit_score, k=k, seed=seed
        )
    evalkit.write_report(
        report,
        json_path=_opt(args, cfg, "out"),
        table_path=_opt(args, cfg, "table"),
    )
    print(report.to_table())
    return EXIT_OK


def cmd_characterize(args, cfg):
    records = corpus_mod.read_corpus(_opt(args, cfg, "corpus"))
    labels = _read_labels_resolved(_opt(args, cfg, "labels"))
    geo = chz.load_keyword_map(_opt(args, cfg, "geo") or _data_path("geo_domains.toml"))
    locations = chz.load_keyword_map(
        _opt(args, cfg, "locations") or _data_path("locations.toml")
    )
    industries = chz.load_keyword_map(
        _opt(args, cfg, "industries") or _data_path("industries.toml")
    )
    area_codes = chz.load_area_codes(
        _opt(args, cfg, "area-codes") or _data_path("area_codes.csv")
    )
    labeled = [r for r in records if r.id in labels]
    attrs = [
        chz.extract_attributes(r, geo, locations, industries, area_codes) for r in labeled
    ]
    coords = None
    emb_path = _opt(args, cfg, "emb")
    if emb_path:
        matrix = embedstore.read_emb1(emb_path)
        joined = embedstore.join(matrix, labels, allow_missing=True)
        pca = pca_project(joined.X, k=2, seed=int(_opt(args, cfg, "seed", DEFAULT_SEED)))
        coords = [
            (ad_id, float(row[0]), float(row[1]))
            for ad_id, row in zip(joined.ids, pca.coords)
        ]
    rep = chz.report(attrs, labels, pca_coords=coords)
    written = rep.write(_opt(args, cfg, "out-dir"))
    print(json.dumps({"records": len(attrs), "files": [str(p) for p in written]}))
    return EXIT_OK


def cmd_synth(args, cfg):
    scenario_path = _opt(args, cfg, "scenario")
    kwargs = {}
    if scenario_path:
        with open(scenario_path, "rb") as fh:
            kwargs.update(tomli.load(fh))
    if "ads_per_entity" in kwargs:
        kwargs["ads_per_entity"] = tuple(kwargs["ads_per_entity"])
    seed = _opt(args, cfg, "seed")
    if seed is not None:
        kwargs["seed"] = int(seed)
    config = synthgen.ScenarioConfig(**kwargs)
    records, domains, truth = synthgen.generate(config)
    out_dir = Path(_opt(args, cfg, "out-dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    corpus_mod.write_corpus(records, out_dir / "corpus.jsonl")
    synthgen.write_ground_truth(truth, out_dir / "ground_truth.jsonl")
    with open(out_dir / "domains.jsonl", "w", encoding="utf-8") as fh:
        for d in domains:
            fh.write(
                json.dumps({"domain": d.name, "category": d.category, "post_count": d.post_count})
            )
            fh.write("\n")
    emb_dim = _opt(args, cfg, "emb-dim")
    if emb_dim:
        scrubbed = [corpus_mod.scrub_phones(r) for r in records]
        matrix = embedstore.hash_embeddings(
            [(r.id, r.title + "\n" + r.body) for r in scrubbed],
            dim=int(emb_dim),
            seed=config.seed,
        )
        embedstore.write_emb1(matrix, out_dir / "corpus.emb1")
    print(json.dumps({"records": len(records), "risky_truth": sum(
        1 for v in truth.values() if v == labelnet.RISKY)}))
    return EXIT_OK


def cmd_pca(args, cfg):
    matrix = embedstore.read_emb1(_opt(args, cfg, "emb"))
    labels_path = _opt(args, cfg, "labels")
    labels = _read_labels_resolved(labels_path) if labels_path else {}
    result = pca_project(
        matrix.data,
        k=int(_opt(args, cfg, "k", 2)),
        seed=int(_opt(args, cfg, "seed", DEFAULT_SEED)),
    )
    out = _opt(args, cfg, "out")
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write("id,pc1,pc2,label\n")
        for ad_id, row in zip(matrix.ids, result.coords):
            lab = labels.get(ad_id)
            name = lab.label if lab else ""
            pc2 = row[1] if result.coords.shape[1] > 1 else 0.0
            fh.write(f"{ad_id},{row[0]!r},{pc2!r},{name}\n")
    print(json.dumps({"rows": len(matrix.ids), "components": int(result.coords.shape[1])}))
    return EXIT_OK


# ---------------------------------------------------------------- wiring


def _add(sub, name, func, flags):
    p = sub.add_parser(name)
    for flag, kwargs in flags:
        p.add_argument(flag, **kwargs)
    p.set_defaults(func=func, command=name)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="adrisk")
    parser.add_argument("--config", help="TOML file with per-command option sections")
    # No flag is argparse-required: a --config file may supply any value.
    sub = parser.add_subparsers(dest="command", required=True)

    _add(sub, "ingest", cmd_ingest, [
        ("--in", dict(dest="in_", metavar="PATH")),
        ("--out", dict()),
        ("--report", dict()),
        ("--dedup", dict(action="store_const", const=True, default=None)),
    ])
    _add(sub, "filter", cmd_filter, [
        ("--in", dict(dest="in_", metavar="PATH")),
        ("--out", dict()),
        ("--min-posts", dict(type=int)),
        ("--dropped", dict()),
    ])
    _add(sub, "label", cmd_label, [
        ("--corpus", dict()),
        ("--lexicon", dict()),
        ("--out", dict()),
        ("--augment", dict()),
        ("--domains-out", dict()),
    ])
    _add(sub, "sample", cmd_sample, [
        ("--labels", dict()),
        ("--strategy", dict(choices=["balanced", "moderate", sampler.BALANCED, sampler.MODERATE])),
        ("--seed", dict(type=int)),
        ("--out", dict()),
    ])
    _add(sub, "train", cmd_train, [
        ("--emb", dict()),
        ("--labels", dict()),
        ("--manifest", dict()),
        ("--model", dict(choices=["logreg", "ffnn", "gbt"])),
        ("--out", dict()),
        ("--seed", dict(type=int)),
        ("--c", dict(type=float)),
        ("--lr", dict(type=float)),
        ("--batch", dict(type=int)),
        ("--max-epochs", dict(type=int)),
        ("--grid", dict(choices=["none", "small", "full"])),
        ("--n-trees", dict(type=int)),
        ("--max-depth", dict(type=int)),
        ("--learning-rate", dict(type=float)),
        ("--subsample", dict(type=float)),
        ("--colsample", dict(type=float)),
    ])
    _add(sub, "predict", cmd_predict, [
        ("--model", dict()),
        ("--emb", dict()),
        ("--ids", dict()),
        ("--name", dict()),
        ("--out", dict()),
    ])
    _add(sub, "ensemble", cmd_ensemble, [
        ("--pred", dict(action="append")),
        ("--out", dict()),
        ("--flag-incomplete", dict()),
    ])
    _add(sub, "evaluate", cmd_evaluate, [
        ("--emb", dict()),
        ("--labels", dict()),
        ("--manifest", dict()),
        ("--pred", dict()),
        ("--model", dict(choices=["logreg", "ffnn", "gbt"])),
        ("--folds", dict(type=int)),
        ("--seed", dict(type=int)),
        ("--c", dict(type=float)),
        ("--n-trees", dict(type=int)),
        ("--max-depth", dict(type=int)),
        ("--learning-rate", dict(type=float)),
        ("--out", dict()),
        ("--table", dict()),
    ])
    _add(sub, "characterize", cmd_characterize, [
        ("--corpus", dict()),
        ("--labels", dict()),
        ("--geo", dict()),
        ("--locations", dict()),
        ("--industries", dict()),
        ("--area-codes", dict()),
        ("--emb", dict()),
        ("--seed", dict(type=int)),
        ("--out-dir", dict()),
    ])
    _add(sub, "synth", cmd_synth, [
        ("--scenario", dict()),
        ("--seed", dict(type=int)),
        ("--emb-dim", dict(type=int)),
        ("--out-dir", dict()),
    ])
    _add(sub, "pca", cmd_pca, [
        ("--emb", dict()),
        ("--labels", dict()),
        ("--k", dict(type=int)),
        ("--seed", dict(type=int)),
        ("--out", dict()),
    ])
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg_all = _load_config(args.config)
        cfg = cfg_all.get(args.command, {})
        # `--in` lands on args.in_; expose it under the plain name too.
        if hasattr(args, "in_"):
            setattr(args, "in", args.in_)
        return args.func(args, cfg)
    except FileNotFoundError as exc:
        _fail(exc, EXIT_MISSING_FILE)
    except (
        json.JSONDecodeError,
        KeyError,
        corpus_mod.LexiconError,
        embedstore.Emb1Error,
        ValueError,
    ) as exc:
        _fail(exc, EXIT_SCHEMA)
    except Exception as exc:  # pragma: no cover - catch-all contract
        _fail(exc, EXIT_OTHER)


def _fail(exc: Exception, code: int):
    print(
        json.dumps({"error": type(exc).__name__, "message": str(exc)}),
        file=sys.stderr,
    )
    raise SystemExit(code)


if __name__ == "__main__":
    raise SystemExit(main())
