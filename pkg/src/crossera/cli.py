"""Command-line entry points for the pipeline and its standalone stages."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import corpus as corpus_mod
from . import eval as eval_mod
from . import pipeline
from .errors import CrosseraError, StageError

STAGE_COMMANDS = {
    "preprocess": "clean, enhance, and retokenise all inputs",
    "train-emb": "train historical and modern embeddings",
    "map": "align the two embedding spaces",
    "train-summ": "train the summariser on modern pairs",
    "swap": "swap historical embeddings into the encoder",
    "summarise": "decode the historical inputs",
    "eval": "score decodes against references",
}


def _add_config_args(sub: argparse.ArgumentParser, required: bool = True) -> None:
    sub.add_argument("--config", required=required, help="YAML run configuration")
    sub.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override a config field (dotted path), e.g. --set embeddings.dim=50",
    )
    sub.add_argument("--quiet", action="store_true", help="do not echo the effective config")


def _load_config(args) -> pipeline.PipelineConfig:
    with open(args.config, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    raw = pipeline.apply_overrides(raw, args.overrides)
    cfg = pipeline.validate_dict(raw, base_dir=Path(args.config).parent)
    if not args.quiet:
        print("# effective configuration")
        print(yaml.safe_dump(cfg.effective(), sort_keys=True).rstrip())
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossera",
        description="historical-to-modern text summarisation pipeline",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    run_p = subs.add_parser("run", help="run the pipeline end to end")
    _add_config_args(run_p)
    run_p.add_argument(
        "--stages", default=None,
        help=f"comma-separated subset of: {','.join(pipeline.STAGES)}",
    )

    for name, help_text in STAGE_COMMANDS.items():
        sub = subs.add_parser(name, help=help_text)
        _add_config_args(sub, required=(name != "eval"))
        if name == "eval":
            sub.add_argument("--candidates", help="standalone mode: decode JSONL")
            sub.add_argument("--references", help="standalone mode: reference JSONL")
            sub.add_argument("--unit", choices=("word", "character"))
            sub.add_argument("--report", help="standalone mode: output TSV path")
            sub.add_argument("--means", help="standalone mode: output JSON path")

    stats_p = subs.add_parser("stats", help="corpus length statistics")
    stats_p.add_argument("--docs", required=True, help="document file")
    stats_p.add_argument("--format", default="jsonl", choices=("jsonl", "tsv", "plain"))
    stats_p.add_argument("--unit", default="word", choices=("word", "character"))
    return parser


def _cmd_stats(args) -> int:
    docs = corpus_mod.load_documents(args.docs, format=args.format)
    stats = corpus_mod.compute_stats(docs, unit=args.unit)
    print(f"documents      {len(docs)}")
    print(f"unit           {stats.unit}")
    print(f"L_story        {stats.mean_story_len:.1f}")
    print(f"L_summ         {stats.mean_summ_len:.1f}")
    print(f"CR             {100.0 * stats.compression_rate:.1f}%")
    return 0


def _cmd_eval_standalone(args) -> int:
    report = eval_mod.evaluate_files(
        args.candidates, args.references, args.unit or "word",
        args.report or "report.tsv", args.means or "means.json",
    )
    print(report.format_means())
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "eval" and args.candidates:
            if not args.references:
                print("error: --references is required with --candidates", file=sys.stderr)
                return 1
            return _cmd_eval_standalone(args)
        if getattr(args, "config", None) is None:
            print("error: --config is required here", file=sys.stderr)
            return 1
        cfg = _load_config(args)
        stages = None
        if args.command == "run":
            if args.stages:
                stages = [s.strip() for s in args.stages.split(",") if s.strip()]
        else:
            stages = [args.command]
        manifest = pipeline.run(cfg, stages)
        done = [s for s, v in manifest["stages"].items() if v.get("status") == "done"]
        print(f"completed stages: {', '.join(done)}")
        print(f"manifest: {cfg.out_dir / 'manifest.json'}")
        return 0
    except StageError as exc:
        print(f"stage failure: {exc}", file=sys.stderr)
        return 2
    except CrosseraError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
