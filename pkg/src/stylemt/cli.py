"""Command-line pipeline: prepare, align, phrases, lm, decode, eval, sweep,
report, reverse.  Every configuration key is overridable by a long flag of
the same name; exit codes are 0 (ok), 1 (usage), 2 (data or model error).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from . import pipeline
from .errors import ConfigError, StyleMTError
from .pipeline import PipelineConfig


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


_STAGE_HELP = [
    ("prepare", "tokenize, truecase, scrub, clean, and split the corpus"),
    ("align", "train word alignments on the training split"),
    ("phrases", "extract phrase pairs and estimate the phrase table"),
    ("lm", "train the target-side language model"),
    ("decode", "batch-decode a tokenized file (default: test source side)"),
    ("eval", "score decoded test output against references"),
    ("sweep", "grid-sweep component weights on the dev split"),
    ("report", "decode the test set and compare against the copy baseline"),
    ("reverse", "flip the translation direction in the manifest"),
]

_STAGES = {
    "prepare": pipeline.stage_prepare,
    "align": pipeline.stage_align,
    "phrases": pipeline.stage_phrases,
    "lm": pipeline.stage_lm,
    "eval": pipeline.stage_eval,
    "sweep": pipeline.stage_sweep,
    "report": pipeline.stage_report,
    "reverse": pipeline.stage_reverse,
}


def build_parser() -> _Parser:
    parser = _Parser(
        prog="stylemt",
        description="Monolingual phrase-based MT pipeline for text style transfer.",
    )
    sub = parser.add_subparsers(dest="command", metavar="subcommand")
    for name, help_text in _STAGE_HELP:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--workdir", required=True, help="pipeline working directory")
        p.add_argument("--config", default=None, help="key=value config file")
        for f in fields(PipelineConfig):
            p.add_argument(f"--{f.name}", default=None, metavar="V")
        if name == "decode":
            p.add_argument("--input", default=None,
                           help="tokenized input file (one segment per line)")
            p.add_argument("--tag", default="test",
                           help="basename for out/<tag>.out and out/<tag>.feats.tsv")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    if not args.command:
        parser.print_help(sys.stderr)
        return 1
    overrides = {f.name: getattr(args, f.name) for f in fields(PipelineConfig)}
    try:
        with pipeline.workdir_lock(args.workdir):
            config = pipeline.resolve_config(args.workdir, args.config, overrides)
            if args.command == "decode":
                pipeline.stage_decode(args.workdir, config, args.input, args.tag)
            else:
                _STAGES[args.command](args.workdir, config)
    except ConfigError as exc:
        print(f"stylemt {args.command}: {exc}", file=sys.stderr)
        return 1
    except (StyleMTError, OSError) as exc:
        print(f"stylemt {args.command}: {exc}", file=sys.stderr)
        return 2
    return 0


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
