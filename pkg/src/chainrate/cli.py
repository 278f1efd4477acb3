"""Command line entry point: ``chainrate bounds | simulate | check``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checks import run_checks
from .coupling import simulate
from .errors import ValidationError
from .fileio import CORPUS, emit_report, load_corpus, parse_chain_file
from .report import run_report

EXIT_OK, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2


def _load_chain(spec: str):
    if not Path(spec).exists() and spec in CORPUS:
        return load_corpus()[spec]
    return parse_chain_file(spec)


def _int_list(text: str) -> list:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _initial_law(text: str, n: int) -> np.ndarray:
    if text == "uniform":
        return np.full(n, 1.0 / n)
    if "," in text:
        return np.array([float(v) for v in text.split(",")])
    x = int(text)
    if not 0 <= x < n:
        raise ValidationError(f"state {x} outside 0..{n - 1}")
    law = np.zeros(n)
    law[x] = 1.0
    return law


def _write(text: str, output):
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_bounds(args) -> int:
    chain = _load_chain(args.input)
    sim = None
    if args.sim_trials:
        sim = {"trials": args.sim_trials, "seed": args.seed}
    report = run_report(chain, args.m, args.n_max, eps=args.eps, sim=sim)
    text = emit_report(report, args.format)
    _write(text, args.output)
    return EXIT_OK


def cmd_simulate(args) -> int:
    chain = _load_chain(args.input)
    n = chain.n_states
    stats = simulate(
        chain,
        _initial_law(args.mu1, n),
        _initial_law(args.mu2, n),
        args.m,
        args.blocks,
        args.trials,
        args.seed,
    )
    _write(json.dumps(stats.to_dict(), indent=2) + "\n", args.output)
    return EXIT_OK


def cmd_check(args) -> int:
    chains = [_load_chain(p) for p in args.input] if args.input else list(load_corpus().values())
    results = run_checks(chains)
    for res in results:
        print(res.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_VIOLATION if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chainrate", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="compare convergence bounds against the exact TV diameter")
    p.add_argument("--input", required=True, help="chain JSON file or bundled chain name")
    p.add_argument("--m", type=_int_list, default=[1], help="comma separated block sizes")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    p.add_argument("--sim-trials", type=int, default=0, help="add SimCoupling rows from this many trials")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("simulate", help="Monte Carlo run of the block coupling")
    p.add_argument("--input", required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--blocks", type=int, required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mu1", default="0", help="state index, 'uniform' or comma separated law")
    p.add_argument("--mu2", default="uniform")
    p.add_argument("--output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="run the invariant suite (bundled corpus by default)")
    p.add_argument("--input", nargs="*", help="chain files to check instead of the bundled corpus")
    p.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, OSError) as err:
        print(f"chainrate: error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
