"""Command line interface: run a scenario, run a study, or check a config."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .studies import run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porofix",
        description="Fixed-stress split solver for quasi-static poroelasticity "
                    "with mixed flow and interior-penalty mechanics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "run a single scenario (study.type must be none)"),
        ("study", "run the study configured under study.type"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", default=None,
                       help="output directory (defaults to output.directory)")
    pc = sub.add_parser("check", help="validate a configuration and exit")
    pc.add_argument("--config", required=True, help="scenario JSON file")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    if args.command == "check":
        print(json.dumps(config.resolved(), sort_keys=True, indent=2))
        return 0

    if args.command == "run" and config.study != "none":
        print("configuration error: study.type must be none for 'run' "
              "(use 'porofix study')", file=sys.stderr)
        return 2
    if args.command == "study" and config.study == "none":
        print("configuration error: study.type is none; nothing to study "
              "(use 'porofix run')", file=sys.stderr)
        return 2

    outdir = args.out if args.out is not None else config.out_directory
    if outdir is None:
        print("configuration error: no output directory (pass --out or set "
              "output.directory)", file=sys.stderr)
        return 2

    try:
        artifacts = run_scenario(config, Path(outdir))
    except (RuntimeError, ValueError) as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    for name in artifacts:
        print(f"wrote {Path(outdir) / name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
