"""Command-line entry point: ``charsums <scenario> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .report import emit
from .scenarios import run_scenario

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NOT_DEMONSTRATED = 3

COMMANDS = ("theorem1", "theorem2", "theorem3", "theorem4", "polya-check", "rmf-oracle", "bias-search")

log = logging.getLogger("charsums")


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed {text} is not an unsigned 64-bit integer")
    return value


def _threads(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("threads must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="charsums", description="Short character sum experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="INI file overriding the built-in defaults")
        p.add_argument("--seed", type=_seed, default=0, help="unsigned 64-bit seed (default 0)")
        p.add_argument("--out", default="out", help="output directory (default ./out)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--threads", type=_threads, default=1)
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.command, args.config, seed=args.seed, out_dir=args.out)
        report = run_scenario(cfg, threads=args.threads)
    except ConfigError as exc:
        print(f"config rejected: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        paths = emit(report, args.format, args.out)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in paths:
        log.info("wrote %s", path)
    print(f"{report.scenario}: demonstrated={report.demonstrated}")
    for note in report.notes:
        print(f"  note: {note}")
    return EXIT_NOT_DEMONSTRATED if report.demonstrated is False else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
