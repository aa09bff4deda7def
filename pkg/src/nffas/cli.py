"""Command-line entry point: run experiments, validate, print defaults."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, default_config, dump_config, load_config
from .harness import run_experiments
from .validate import SUITES, run_suites


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nffas",
        description="Energy-efficiency experiments for a near-field fluid-antenna link.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute the experiments named in a config file")
    run_p.add_argument("config", help="path to a JSON config file")
    run_p.add_argument("--seed", type=int, default=None, help="override the master seed")
    run_p.add_argument("--out", default="out", help="output directory (default: ./out)")
    run_p.add_argument("--jobs", type=int, default=1, help="parallel trial workers (default: 1)")
    run_p.add_argument("--plots", action="store_true", help="also write SVG charts")

    val_p = sub.add_parser("validate", help="run the oracle/property suites")
    val_p.add_argument(
        "--suite",
        action="append",
        choices=sorted(SUITES),
        help="run only this suite (repeatable; default: all)",
    )

    sub.add_parser("show-config", help="print the fully resolved default config as JSON")
    return parser


def _error_line(code: str, message: str) -> None:
    print(json.dumps({"error": code, "message": message}), file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "show-config":
        sys.stdout.write(dump_config(default_config()))
        return 0

    if args.command == "validate":
        try:
            results = run_suites(args.suite)
        except ValueError as exc:
            _error_line("bad-suite", str(exc))
            return 2
        all_ok = True
        for name, ok, detail in results:
            print(f"suite {name}: {'PASS' if ok else 'FAIL'} ({detail})")
            all_ok &= ok
        if not all_ok:
            _error_line("validation-failed", "one or more suites failed")
        return 0 if all_ok else 1

    if args.command == "run":
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            _error_line("bad-config", str(exc))
            return 2
        if args.seed is not None:
            if not 0 <= args.seed < 2**64:
                _error_line("bad-seed", f"--seed must be in [0, 2^64), got {args.seed}")
                return 2
            from dataclasses import replace

            cfg = replace(cfg, master_seed=args.seed)
        if args.jobs < 1:
            _error_line("bad-jobs", f"--jobs must be >= 1, got {args.jobs}")
            return 2
        try:
            tables = run_experiments(cfg, args.out, jobs=args.jobs, plots=args.plots)
        except (ValueError, RuntimeError) as exc:
            _error_line("run-failed", str(exc))
            return 1
        for name in tables:
            print(f"wrote {args.out}/{name}_raw.csv and {args.out}/{name}_agg.csv")
        return 0

    raise AssertionError(args.command)


if __name__ == "__main__":
    sys.exit(main())
