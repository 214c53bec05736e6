"""Command line: simulate, record, analyze, chsh, verify.

Exit status 0 on success, 1 when a verification suite fails, 2 on usage or
parse errors.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .algebra import as_direction
from .chsh import ChshConfig, planar
from .experiment import (
    PIPELINES,
    ConfigError,
    ExperimentConfig,
    analyze,
    chsh_run,
    format_record,
    format_rows,
    record,
    simulate,
)
from .trial_log import LogFormatError, read_log
from .verify import SUITES, verify


class UsageError(Exception):
    pass


def parse_direction(text: str):
    """Degrees in the xy-plane (``"45"``) or an explicit vector (``"x,y,z"``), normalized."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return planar(float(parts[0]))
        if len(parts) == 3:
            return as_direction([float(p) for p in parts], normalize=True)
    except ValueError as exc:
        raise UsageError(f"bad direction {text!r}: {exc}") from None
    raise UsageError(f"bad direction {text!r}: expected DEGREES or x,y,z")


def parse_angles(text: str):
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"bad --angles {text!r}: expected START:STOP:STEP")
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad --angles {text!r}: not numbers") from None


def parse_pipelines(text: str):
    names = tuple(p.strip() for p in text.split(",") if p.strip())
    bad = [p for p in names if p not in PIPELINES]
    if bad or not names:
        raise UsageError(f"bad --pipelines {text!r}: choose from {','.join(PIPELINES)}")
    return names


def _common(p: argparse.ArgumentParser, angles=True):
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    if angles:
        p.add_argument("--angles", default=None, metavar="START:STOP:STEP",
                       help="sweep b in the xy-plane against a = +x (default 0:180:5)")
    p.add_argument("--a", default=None, help="degrees or x,y,z")
    p.add_argument("--b", default=None, help="degrees or x,y,z")
    p.add_argument("--pipelines", default=",".join(PIPELINES))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--strict-sampling", action="store_true",
                   help="draw independent trials for every setting pair")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eprga", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("simulate", help="run trials and report correlations"))

    p = sub.add_parser("record", help="write a binary trial log")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH")

    p = sub.add_parser("analyze", help="score a recorded trial log")
    p.add_argument("log", metavar="LOG")
    _common(p)
    p.set_defaults(trials=None, seed=None)

    p = sub.add_parser("chsh", help="CHSH strings and variance bound for a quadruple")
    _common(p, angles=False)
    p.add_argument("--a-prime", default=None, help="degrees or x,y,z")
    p.add_argument("--b-prime", default=None, help="degrees or x,y,z")

    p = sub.add_parser("verify", help="run an invariant suite")
    p.add_argument("suite", choices=SUITES)
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, metavar="PATH")
    return parser


def _config(args, trials=None, seed=None) -> ExperimentConfig:
    pair = None
    if args.a is not None or args.b is not None:
        if args.a is None or args.b is None:
            raise UsageError("--a and --b must be given together")
        if getattr(args, "angles", None) is not None:
            raise UsageError("use either --angles or --a/--b, not both")
        pair = (parse_direction(args.a), parse_direction(args.b))
    angles = parse_angles(args.angles) if getattr(args, "angles", None) else (0.0, 180.0, 5.0)
    return ExperimentConfig(
        trials=args.trials if trials is None else trials,
        seed=args.seed if seed is None else seed,
        angles=None if pair is not None else angles,
        pair=pair,
        pipelines=parse_pipelines(args.pipelines),
        fmt=args.format,
        workers=args.workers,
        strict=args.strict_sampling,
    )


def _emit(text: str, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            cfg = _config(args)
            meta = {"seed": cfg.seed, "trials": cfg.trials, "strict": cfg.strict}
            _emit(format_rows(simulate(cfg), cfg.fmt, meta), args.out)
        elif args.command == "record":
            record(ExperimentConfig(trials=args.trials, seed=args.seed), args.out)
        elif args.command == "analyze":
            log = read_log(args.log)
            cfg = _config(args, trials=log.count, seed=log.seed)
            meta = {"seed": log.seed, "trials": log.count, "strict": False}
            _emit(format_rows(analyze(log, cfg), cfg.fmt, meta), args.out)
        elif args.command == "chsh":
            dirs = (args.a, args.a_prime, args.b, args.b_prime)
            if any(d is None for d in dirs):
                raise UsageError("chsh needs --a, --a-prime, --b and --b-prime")
            quad = ChshConfig(*(parse_direction(d) for d in dirs))
            cfg = ExperimentConfig(trials=args.trials, seed=args.seed, angles=None,
                                   quadruple=quad, fmt=args.format, workers=args.workers,
                                   strict=args.strict_sampling)
            _emit(format_record(chsh_run(cfg), cfg.fmt), args.out)
        elif args.command == "verify":
            report = verify(args.suite, samples=args.samples, seed=args.seed)
            _emit(json.dumps(report.as_dict(), indent=2) + "\n", args.out)
            return 0 if report.passed else 1
    except (UsageError, ConfigError, LogFormatError, ValueError) as exc:
        print(f"eprga {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main():
    sys.exit(run())
