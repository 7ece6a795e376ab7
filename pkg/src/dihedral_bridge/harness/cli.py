"""Command-line entry point: ``dihedral-bridge <experiment> [options]``."""
from __future__ import annotations

import argparse
import sys

from ..errors import DihedralBridgeError, ParameterError
from ..report import emit_report
from .experiments import EXPERIMENTS
from .runner import FORMATS, RunConfig, run

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _pairs(items: list[str], what: str) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ParameterError(f"{what} must look like key=value, got {item!r}")
        out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dihedral-bridge", description="Run a seeded reduction experiment.")
    p.add_argument("experiment", choices=sorted(EXPERIMENTS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=None, help="defaults to the experiment's own count")
    p.add_argument("--out", choices=FORMATS, default="json")
    p.add_argument("--out-path", default=None, help="file to write; stdout when omitted or '-'")
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    p.add_argument("--threshold", action="append", default=[], metavar="KEY=VALUE")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    try:
        config = RunConfig(
            experiment=args.experiment,
            params=_pairs(args.param, "--param"),
            seed=args.seed,
            trials=args.trials,
            out_format=args.out,
            out_path=args.out_path,
            thresholds=_pairs(args.threshold, "--threshold"),
        )
        config.resolved()
    except ParameterError as exc:
        print(f"dihedral-bridge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        report = run(config)
    except ParameterError as exc:
        # raised by experiment setup before any trial has run
        print(f"dihedral-bridge: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DihedralBridgeError as exc:
        print(f"dihedral-bridge: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    text = emit_report(report, args.out, args.out_path)
    if args.out_path in (None, "-"):
        sys.stdout.write(text)
    return EXIT_PASS if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
