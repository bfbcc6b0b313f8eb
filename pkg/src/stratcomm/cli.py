"""Command line entry point.

Every subcommand reads an optional JSON config, runs one experiment, and
writes CSV or JSON to --out (stdout when omitted). Exit codes: 0 on
success, 2 on configuration errors, 1 on runtime failures; errors go to
stderr as a one-line JSON object. No environment variables are consulted.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .experiments import RUNNERS, ConfigError, config_digest, emit, load_config, render

_COMMAND_HELP = {
    "capacity": "channel capacity of the config's channel matrix",
    "rdcurve": "rate-distortion curve (or the bundled comparison sweep)",
    "ose": "optimistic commitment value for a model or reduced game",
    "rse": "pessimistic commitment value for a model or reduced game",
    "ne": "simultaneous-move equilibria for a model or reduced game",
    "audit-order": "solve ose, rse, and ne together and check their ordering",
    "counterexample": "scalar game where pessimistic commitment beats every equilibrium",
    "table1": "three-symbol game sweep over the alpha, beta cost offsets",
    "feasibility": "rate feasibility report for an encoder against the channel budget",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stratcomm",
        description="strategic semantic communication experiments",
    )
    parser.add_argument("--version", action="version", version=f"stratcomm {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, help_text in _COMMAND_HELP.items():
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", help="path to a JSON config file")
        sub.add_argument("--out", help="output file (stdout when omitted)")
        sub.add_argument(
            "--format",
            choices=("csv", "json"),
            default="csv",
            help="output format (default csv)",
        )
        sub.add_argument(
            "--seed",
            type=int,
            default=None,
            help="seed for randomized runs; overrides the config seed",
        )
    return parser


def _fail(stream, kind: str, message: str) -> None:
    print(json.dumps({"error": {"type": kind, "message": message}}), file=stream)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config) if args.config else {"schema_version": 1}
    except ConfigError as err:
        _fail(sys.stderr, "config", str(err))
        return 2
    seed = args.seed if args.seed is not None else config.get("seed")
    runner = RUNNERS[args.command]
    try:
        rows, columns, extras = runner(config, seed=seed)
    except ConfigError as err:
        _fail(sys.stderr, "config", str(err))
        return 2
    except Exception as err:  # noqa: BLE001 - boundary: report, do not crash
        _fail(sys.stderr, "runtime", f"{type(err).__name__}: {err}")
        return 1
    metadata = {
        "tool": "stratcomm",
        "version": __version__,
        "command": args.command,
        "seed": "none" if seed is None else seed,
        "config_digest": config_digest(config, seed),
    }
    metadata.update(extras)
    try:
        if args.out:
            emit(rows, columns, args.out, args.format, metadata)
        else:
            sys.stdout.write(render(rows, columns, args.format, metadata))
    except (RuntimeError, OSError, ValueError) as err:
        _fail(sys.stderr, "runtime", str(err))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
