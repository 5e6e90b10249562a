"""Command-line entry point.

Exit codes: 0 all checks pass, 1 a check failed, 2 config or usage error,
3 run aborted on a domain or singularity error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import __version__
from . import errors as E
from .catalog import catalog_list
from .config import load
from .expr import parse
from .funk_solver import solve_funk
from .report import emit
from .runner import USAGE_ERRORS, run
from .verify import verify_paper

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_ABORT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spraylab", description="Numerical checks for sprays, Hamel and Funk functions.")
    p.add_argument("--version", action="version", version=f"spraylab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run the checks in a TOML config")
    r.add_argument("-c", "--config", required=True)
    r.add_argument("-o", "--output", help="report path (default: config 'output' or stdout)")
    r.add_argument("--seed", type=int)
    r.add_argument("--points", type=int)
    r.add_argument("--order", type=int)

    v = sub.add_parser("verify-paper", help="run the built-in verification suite")
    v.add_argument("--full", action="store_true", help="200 points per check instead of 20")
    v.add_argument("-o", "--output")

    c = sub.add_parser("catalog", help="inspect the model catalog")
    c.add_argument("action", choices=["list"])

    f = sub.add_parser("funk-solve", help="solve P = phi(y + P x) at one point")
    f.add_argument("--phi", required=True, help="expression in y1..yn")
    f.add_argument("--x", required=True, type=_csv)
    f.add_argument("--y", required=True, type=_csv)
    return p


def _write(report, path: str | None) -> None:
    if path:
        with open(path, "w") as fh:
            emit(report, fh)
    else:
        emit(report, sys.stdout)


def _summary(report) -> None:
    a = report.aggregate
    line = f"pass {a.pass_count}  fail {a.fail_count}  skipped {a.skipped}  {a.wall_time:.2f}s"
    if a.aborted:
        line += f"  ABORTED: {a.message}"
    failed = report.failed_checks()
    if failed:
        line += f"  failed: {', '.join(failed)}"
    print(line, file=sys.stderr)


def _cmd_run(args) -> int:
    cfg = load(args.config)
    if args.seed is not None:
        cfg.sampling["seed"] = args.seed
    if args.points is not None:
        if args.points < 1:
            raise E.ConfigError("--points must be positive", "--points")
        cfg.sampling["count"] = args.points
    if args.order is not None:
        if args.order < 1:
            raise E.ConfigError("--order must be positive", "--order")
        cfg.order = args.order
    report = run(cfg)
    _write(report, args.output or cfg.output)
    _summary(report)
    return report.exit_code


def _cmd_verify(args) -> int:
    report = verify_paper("full" if args.full else "quick")
    if args.output:
        _write(report, args.output)
    for rec in report.records:
        print(f"{rec.verdict.upper():4s}  {rec.check}.{rec.residual_name}  {rec.residual_value:.3g} (tol {rec.tol:g})")
    _summary(report)
    return report.exit_code


def _cmd_catalog(args) -> int:
    for cid, summary, params in catalog_list():
        shown = ", ".join(f"{k}={v!r}" for k, v in params.items())
        print(f"{cid:18s} {summary}" + (f"  [{shown}]" if shown else ""))
    return EXIT_OK


def _cmd_funk_solve(args) -> int:
    if len(args.x) != len(args.y):
        raise E.ConfigError("--x and --y need the same length", "--x")
    sol = solve_funk(parse(args.phi, len(args.y)), args.x, args.y)
    print(f"P = {sol.P!r}  iterations {sol.iterations}  residual {sol.residual:.3g}  ({sol.method})")
    return EXIT_OK


COMMANDS = {"run": _cmd_run, "verify-paper": _cmd_verify, "catalog": _cmd_catalog, "funk-solve": _cmd_funk_solve}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except E.ConfigError as exc:
        print(f"spraylab: config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except USAGE_ERRORS as exc:
        print(f"spraylab: usage error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (E.SprayLabError, ArithmeticError) as exc:
        print(f"spraylab: aborted: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ABORT


if __name__ == "__main__":
    sys.exit(main())
