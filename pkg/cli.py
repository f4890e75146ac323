"""
Command-line front end for concurrence sweeps and derived tables.

Exit codes: 0 success, 1 oracle tolerance failure, 2 invalid request,
3 numerical failure.
"""

import argparse
import sys
from typing import List, Optional

from config import config
from chain import ChainError, InvalidChainError
from oracle import OracleSizeError
from sweep import (
    SweepRequest, SweepRequestError, SweepRunner, critical_field_frame,
    oracle_check, staggering_frame, write_table,
)
from utils import parse_grid, parse_int_grid, setup_logging

logger = setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)

EXIT_OK = 0
EXIT_ORACLE_FAILURE = 1
EXIT_INVALID = 2
EXIT_NUMERICAL = 3


def _axis(parse, text: str, name: str) -> list:
    """Parse one grid option, reporting malformed text as an invalid request."""
    try:
        return parse(text)
    except ValueError as e:
        raise SweepRequestError(f"--{name}: {e}") from e


def _emit(frame, args) -> None:
    text = write_table(frame, args.out, args.format)
    if not args.out:
        sys.stdout.write(text)


def cmd_concurrence(args, runner: SweepRunner) -> int:
    """Concurrence sweep over the (b, T, L) grid."""
    req = SweepRequest.build(
        mode=args.mode,
        n=args.n,
        v=args.v,
        b=_axis(parse_grid, args.b, "b"),
        T=_axis(parse_grid, args.T, "T"),
        L=_axis(parse_int_grid, args.L, "L"),
        out=args.out,
        format=args.format,
        units=args.units,
    )
    _emit(runner.run(req).to_frame(), args)
    return EXIT_OK


def cmd_critical_fields(args, runner: SweepRunner) -> int:
    """Transition-field table, optionally with the entanglement range per sector."""
    _emit(critical_field_frame(args.n, args.v, with_range=args.with_range), args)
    return EXIT_OK


def cmd_limit_temp(args, runner: SweepRunner) -> int:
    """Limit temperatures T_L(b) and entanglement intervals."""
    Ls = _axis(parse_int_grid, args.L, "L")
    if not Ls:
        raise SweepRequestError("L range must not be empty")

    if args.plateau:
        if args.n is None:
            raise SweepRequestError("--plateau needs --n")
        frame = runner.plateau_temperatures(Ls, args.v, args.n)
    else:
        scale = abs(args.v) if args.units == "v" else 1.0
        bs = [b * scale for b in _axis(parse_grid, args.b, "b")]
        if not bs:
            raise SweepRequestError("b range must not be empty")
        frame = runner.limit_temperatures(Ls, bs, args.v, args.n)

    _emit(frame, args)
    return EXIT_OK


def cmd_oracle_check(args, runner: SweepRunner) -> int:
    """Random-grid comparison against exact diagonalization."""
    report = oracle_check(args.n, seed=args.seed, points=args.points, workers=runner.workers)
    print(report.line())
    return EXIT_OK if report.passed else EXIT_ORACLE_FAILURE


def cmd_staggering(args, runner: SweepRunner) -> int:
    """Plateau limit temperatures of distant pairs across chain sizes."""
    ns = _axis(parse_int_grid, args.n, "n")
    if not ns:
        raise SweepRequestError("n range must not be empty")
    _emit(staggering_frame(ns, args.v, args.rule), args)
    return EXIT_OK


def _add_output(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="Output file (default: stdout)")
    parser.add_argument("--format", choices=["csv", "json"], default="csv",
                        help="Output format (default: csv)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xx-entanglement",
        description="Pair entanglement of the cyclic XX chain in a transverse field",
    )
    parser.add_argument("--log-level", default=None,
                        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="Override LOG_LEVEL")
    parser.add_argument("--workers", type=int, default=None,
                        help="Parallel workers (joblib n_jobs, -1 for all cores)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("concurrence", help="Concurrence sweep over (b, T, L)")
    p.add_argument("--mode", choices=["finite", "bulk", "asymptotic", "oracle"], default="finite")
    p.add_argument("--n", type=int, default=None, help="Chain size (omit for bulk)")
    p.add_argument("--v", type=float, default=1.0, help="Coupling (default = 1.0)")
    p.add_argument("--b", required=True, help="Fields, start:stop:steps or a comma list")
    p.add_argument("--T", required=True, help="Temperatures, start:stop:steps or a comma list")
    p.add_argument("--L", required=True, help="Separations, start:stop or a comma list")
    p.add_argument("--units", choices=["abs", "v"], default="abs",
                   help="Read b and T in units of |v| with 'v'")
    _add_output(p)
    p.set_defaults(handler=cmd_concurrence)

    p = sub.add_parser("critical-fields", help="Ground-state transition fields b_N")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--with-range", action="store_true",
                   help="Add the entanglement range L_m of each sector")
    _add_output(p)
    p.set_defaults(handler=cmd_critical_fields)

    p = sub.add_parser("limit-temp", help="Limit temperatures T_L(b)")
    p.add_argument("--n", type=int, default=None, help="Chain size (omit for bulk)")
    p.add_argument("--v", type=float, default=1.0)
    p.add_argument("--b", default="", help="Fields, start:stop:steps or a comma list")
    p.add_argument("--L", required=True, help="Separations, start:stop or a comma list")
    p.add_argument("--units", choices=["abs", "v"], default="abs")
    p.add_argument("--plateau", action="store_true",
                   help="Report the b -> infinity plateau instead of a field grid")
    _add_output(p)
    p.set_defaults(handler=cmd_limit_temp)

    p = sub.add_parser("oracle-check", help="Compare against exact diagonalization")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=50)
    p.set_defaults(handler=cmd_oracle_check)

    p = sub.add_parser("staggering", help="Distant-pair plateau temperatures across n")
    p.add_argument("--n", required=True, help="Chain sizes, start:stop or a comma list")
    p.add_argument("--v", type=float, default=-1.0)
    p.add_argument("--rule", choices=["half", "nearest"], default="half",
                   help="L = [n/2] ('half') or L = 1 ('nearest')")
    _add_output(p)
    p.set_defaults(handler=cmd_staggering)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and run one subcommand.

    Args:
        argv: Argument list (default: sys.argv[1:])

    Returns:
        Process exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    if args.log_level:
        config.LOG_LEVEL = args.log_level
        setup_logging(config.LOG_LEVEL, config.LOG_FILE or None, config.LOG_TO_CONSOLE)
    runner = SweepRunner(args.workers)

    try:
        return args.handler(args, runner)
    except (SweepRequestError, InvalidChainError, OracleSizeError) as e:
        logger.error("Invalid request: %s", e)
        return EXIT_INVALID
    except (ChainError, ValueError, ArithmeticError) as e:
        logger.error("Numerical failure: %s", e)
        return EXIT_NUMERICAL
