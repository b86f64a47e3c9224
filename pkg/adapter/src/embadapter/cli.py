"""emb-adapter CLI: ``embed`` writes EMB1 files, ``predict`` writes
prediction JSONL files compatible with the pipeline's ensemble stage."""

from __future__ import annotations

import argparse
import json
import sys

from .backends import ModelLoadError
from .embed import AdapterConfig, CorpusError, embed_corpus, read_scrubbed_corpus
from .predict import HttpJsonClient, RulesClient, classify_corpus, write_prediction_run

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_USAGE = 2
EXIT_MISSING_FILE = 3
EXIT_SCHEMA = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(json.dumps({"error": "usage", "message": message}), file=sys.stderr)
        self.exit(EXIT_USAGE)


def build_parser():
    parser = _Parser(prog="emb-adapter")
    sub = parser.add_subparsers(dest="command", required=True)

    embed = sub.add_parser("embed")
    embed.add_argument("--model", default="hash:1024")
    embed.add_argument("--batch-size", type=int, default=2)
    embed.add_argument("--max-tokens", type=int, default=4096)
    embed.add_argument("--in", dest="input_path", required=True)
    embed.add_argument("--out", dest="output_path", required=True)

    pred = sub.add_parser("predict")
    pred.add_argument("--model", default="rules")
    pred.add_argument("--endpoint", help="OpenAI-style chat endpoint for llm:<name> models")
    pred.add_argument("--name", help="model_name recorded in the output rows")
    pred.add_argument("--in", dest="input_path", required=True)
    pred.add_argument("--out", dest="output_path", required=True)
    pred.add_argument("--abstain-report", dest="report_path")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "embed":
            config = AdapterConfig(
                model=args.model,
                input_path=args.input_path,
                output_path=args.output_path,
                batch_size=args.batch_size,
                max_tokens=args.max_tokens,
            )
            count = embed_corpus(config)
            print(json.dumps({"embedded": count, "out": args.output_path}))
        else:
            rows = read_scrubbed_corpus(args.input_path)
            if args.model == "rules":
                client = RulesClient()
            elif args.model.startswith("llm:"):
                if not args.endpoint:
                    raise ModelLoadError("llm:<name> models need --endpoint")
                client = HttpJsonClient(args.endpoint, args.model.split(":", 1)[1])
            else:
                raise ModelLoadError(f"unknown prediction model: {args.model!r}")
            run = classify_corpus(rows, client, model_name=args.name)
            write_prediction_run(run, args.output_path, args.report_path)
            print(
                json.dumps(
                    {"predicted": len(run.predictions), "abstained": len(run.abstained)}
                )
            )
        return EXIT_OK
    except FileNotFoundError as exc:
        _fail(exc, EXIT_MISSING_FILE)
    except (CorpusError, json.JSONDecodeError, ValueError) as exc:
        _fail(exc, EXIT_SCHEMA)
    except Exception as exc:
        _fail(exc, EXIT_OTHER)


def _fail(exc, code):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
    raise SystemExit(code)


if __name__ == "__main__":
    raise SystemExit(main())
