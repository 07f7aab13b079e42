"""Command line entry point.

    typelaws <law> --config FILE [--out PATH] [--format csv|json] [--mode exact|float]
             [--tol TAU] [--epsilon EPS] [--budget N]
    typelaws reproduce <preset> [--out PATH] [--format csv|json]

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 empty feasible set.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ExperimentConfig, parse_text
from .errors import BudgetExceeded, EmptyFeasibleSet, NoConvergence, TypeLawsError, ValidationError
from .output import render
from .presets import PRESETS, reproduce
from .runner import run

SUBCOMMANDS = ("enumerate", "project", "icet", "cwlln", "egcp", "rates", "rcwlln", "rational")

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC, EXIT_EMPTY = 0, 2, 3, 4


def _common(p):
    p.add_argument("--out", help="write records here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="typelaws", description="Exact method-of-types experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run a {name} experiment from a config file")
        p.add_argument("--config", required=True, help="flat key = value config file")
        _common(p)
        p.add_argument("--mode", choices=("exact", "float"))
        p.add_argument("--tol", type=float, help="membership tolerance tau")
        p.add_argument("--epsilon", type=float)
        p.add_argument("--budget", type=int)
    p = sub.add_parser("reproduce", help="run a canned worked example")
    p.add_argument("preset", choices=PRESETS)
    _common(p)
    return parser


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load_config(args) -> ExperimentConfig:
    raw = parse_text(Path(args.config).read_text())
    raw.setdefault("law", args.command)
    if raw["law"] != args.command:
        raise ValidationError(f"config law {raw['law']!r} does not match subcommand {args.command!r}")
    cfg = ExperimentConfig.from_mapping(raw)
    return cfg.with_overrides(format=args.format, mode=args.mode, tau=args.tol, epsilon=args.epsilon,
                              budget=args.budget)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce":
            report = reproduce(args.preset)
            sys.stdout.write(report.text())
            if args.out:
                _write(render(report.records, args.format or "csv"), args.out)
            return EXIT_OK
        cfg = _load_config(args)
        _write(render(run(cfg), cfg.format), args.out)
        return EXIT_OK
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EmptyFeasibleSet as exc:
        print(f"empty feasible set: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except (NoConvergence, BudgetExceeded) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (TypeLawsError, ValueError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
