"""Command-line entry point.

Subcommands: sweep (spec -> CSV), search (spec -> best-mask CSV),
validate (spec -> Monte Carlo / oracle report), oracle (attack JSON ->
check report).  Exit codes: 0 success, 1 validation failure, 2 usage or
configuration error.
"""

from __future__ import annotations

import argparse
import sys

from .config import SpecError, load_spec
from .sweep import run_oracle_checks, run_search, run_sweep, run_validate


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scadkit",
        description="Key-rate sweeps and validation for selective-CAD conference key agreement",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep_p = sub.add_parser("sweep", help="evaluate every (Q, mask) grid point into a CSV")
    sweep_p.add_argument("spec", help="scenario file")
    sweep_p.add_argument("--out", required=True, help="output CSV path")
    sweep_p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    search_p = sub.add_parser("search", help="best mask per grid Q into a CSV")
    search_p.add_argument("spec", help="scenario file")
    search_p.add_argument("--out", required=True, help="output CSV path")
    search_p.add_argument("--jobs", type=int, default=1)

    val_p = sub.add_parser("validate", help="Monte Carlo and exact-oracle agreement report")
    val_p.add_argument("spec", help="scenario file")
    val_p.add_argument("--out", required=True, help="output report path")
    val_p.add_argument("--rounds", type=int, default=200_000, help="GHZ rounds per simulation (even)")
    val_p.add_argument("--seeds", type=int, default=5, help="number of simulation seeds")
    val_p.add_argument("--seed", type=int, default=0, help="base seed")
    val_p.add_argument("--attacks", type=int, default=20, help="random attacks for oracle checks")

    oracle_p = sub.add_parser("oracle", help="exact checks for an explicit attack file")
    oracle_p.add_argument("attacks", help="attack JSON file")
    oracle_p.add_argument("--out", required=True, help="output report path")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        if args.command == "sweep":
            spec = load_spec(args.spec)
            run_sweep(spec, args.out, jobs=args.jobs)
            return 0
        if args.command == "search":
            spec = load_spec(args.spec)
            run_search(spec, args.out, jobs=args.jobs)
            return 0
        if args.command == "validate":
            if args.rounds < 2 or args.rounds % 2:
                print(f"error: --rounds must be even and >= 2, got {args.rounds}", file=sys.stderr)
                return 2
            spec = load_spec(args.spec)
            ok = run_validate(
                spec,
                args.out,
                rounds=args.rounds,
                n_seeds=args.seeds,
                base_seed=args.seed,
                n_attacks=args.attacks,
            )
            if not ok:
                print(f"validation failed; see {args.out}", file=sys.stderr)
                return 1
            return 0
        if args.command == "oracle":
            ok = run_oracle_checks(args.attacks, args.out)
            if not ok:
                print(f"oracle checks failed; see {args.out}", file=sys.stderr)
                return 1
            return 0
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
