"""Command-line entry point.

Exit codes: 0 success, 2 experiment-row failure, 3 no interior root,
64 usage error, 66 unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from typing import List, Optional, Sequence

from . import manyhills, toy
from .census import DEDUP_TOL, POLISH_DIGITS, CensusOptions, Strategy, census
from .em import Constraint, EMOptions, run_em
from .errors import DomainError, InsufficientDataError, NoInteriorRootError, SampleFormatError
from .io import load_sample
from .mixture import MixtureParams, Sample

EXIT_OK = 0
EXIT_ROW_FAILURE = 2
EXIT_NO_ROOT = 3
EXIT_USAGE = 64
EXIT_INPUT = 66

DEFAULT_SIGMAS = tuple(10.0 ** -e for e in range(1, 13))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> List[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output file (default: stdout)")
    common.add_argument("--format", choices=("json", "csv"), default=None,
                        help="output format (default depends on the command)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    em_flags = argparse.ArgumentParser(add_help=False)
    em_flags.add_argument("--max-iters", type=int, default=10000, help="EM iteration cap (default 10000)")
    em_flags.add_argument("--sigma-floor", type=float, default=1e-8,
                          help="standard deviation below which EM stops as degenerate (default 1e-8)")

    p = _Parser(prog="gmmcrit", description="Critical points of two-component Gaussian mixture likelihoods.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", parents=[common, em_flags],
                       help="single EM run; writes the trace (json) or final point (csv)")
    f.add_argument("input", help="sample file: JSON array or one number per line")
    f.add_argument("--start", type=_floats, default=None,
                   help="alpha,mu1,mu2,sigma1,sigma2 (default: 0.5, mean-s, mean+s, s, s)")
    f.add_argument("--equal-variance", action="store_true", help="tie sigma1 = sigma2")

    c = sub.add_parser("census", parents=[common, em_flags], help="multi-start critical point census (json)")
    c.add_argument("input", help="sample file: JSON array or one number per line")
    c.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    c.add_argument("--starts", type=int, default=200, help="starts for RandomPairs and GridAlphaMeans (default 200)")
    c.add_argument("--strategy", action="append", choices=[s.value for s in Strategy],
                   help="start strategy; repeatable (default ClusterSeeded and RandomPairs)")
    c.add_argument("--digits", type=int, default=POLISH_DIGITS,
                   help="polishing precision in decimal digits (default 30)")
    c.add_argument("--tol-dedup", type=float, default=DEDUP_TOL, help="dedup max-norm tolerance (default 1e-4)")
    c.add_argument("--tol-classify", type=float, default=1e-6, help="classification tolerance (default 1e-6)")

    m = sub.add_parser("manyhills", parents=[common, em_flags],
                       help="clustered-sample experiment, one row per cluster pair (csv)")
    m.add_argument("--K", type=int, required=True, help="number of clusters (>= 2)")
    m.add_argument("--digits", type=int, default=POLISH_DIGITS, help="polishing precision (default 30)")

    t = sub.add_parser("toy", parents=[common], help="toy model maximiser on data {0, x} (json)")
    t.add_argument("--x", type=float, required=True, help="second data point (> 0)")
    t.add_argument("--digits", type=int, default=25, help="decimal digits (>= 17, default 25)")

    s = sub.add_parser("surface", parents=[common], help="toy log-likelihood grid (csv)")
    s.add_argument("--x", type=float, default=2.0, help="second data point (default 2)")
    s.add_argument("--alpha-steps", type=int, default=201, help="grid points in alpha over [0, 1] (default 201)")
    s.add_argument("--mu-range", type=_floats, default=[-1.0, 4.0], help="mu_lo,mu_hi (default -1,4)")
    s.add_argument("--mu-steps", type=int, default=201, help="grid points in mu (default 201)")

    u = sub.add_parser("unbounded", parents=[common],
                       help="log-likelihood as sigma1 -> 0 with mu1 pinned to the first point (csv)")
    u.add_argument("input", help="sample file: JSON array or one number per line")
    u.add_argument("--sigmas", type=_floats, default=list(DEFAULT_SIGMAS),
                   help="comma-separated sigma1 values (default 1e-1..1e-12)")
    return p


def _write(args, text: str):
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)


def _em_options(args, constraint=Constraint.FREE) -> EMOptions:
    try:
        return EMOptions(max_iters=args.max_iters, sigma_floor=args.sigma_floor, constraint=constraint)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _check_digits(digits: int):
    if digits < 17:
        raise UsageError(f"--digits must be >= 17, got {digits}")


def _read(path) -> Sample:
    return load_sample(path)


def cmd_fit(args) -> int:
    sample = _read(args.input)
    if sample.N < 2:
        raise InsufficientDataError("fit needs at least two observations")
    if args.start is None:
        s = sample.std
        if s <= 0:
            raise InsufficientDataError("default start needs distinct observations")
        start = MixtureParams(0.5, sample.mean - s, sample.mean + s, s, s)
    else:
        if len(args.start) != 5:
            raise UsageError("--start needs five values: alpha,mu1,mu2,sigma1,sigma2")
        try:
            start = MixtureParams(*args.start)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
    constraint = Constraint.EQUAL_VARIANCE if args.equal_variance else Constraint.FREE
    trace = run_em(start, sample, _em_options(args, constraint))
    if (args.format or "json") == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("status", "iterations", "alpha", "mu1", "mu2", "sigma1", "sigma2", "loglik"))
        w.writerow([trace.status.value, trace.n_iter, *map(repr, trace.final.as_tuple()), repr(trace.logliks[-1])])
        _write(args, buf.getvalue())
    else:
        _write(args, trace.to_json(indent=2) + "\n")
    return EXIT_OK


def cmd_census(args) -> int:
    _check_digits(args.digits)
    if args.format == "csv":
        raise UsageError("census writes JSON only")
    sample = _read(args.input)
    if sample.N < 3:
        raise InsufficientDataError(f"census needs N >= 3, got {sample.N}")
    if args.starts < 1:
        raise UsageError("--starts must be positive")
    opts = CensusOptions(
        strategies=tuple(args.strategy or CensusOptions.strategies),
        n_starts=args.starts,
        seed=args.seed,
        em=_em_options(args),
        dedup_tol=args.tol_dedup,
        classify_tol=args.tol_classify,
        sigma_floor=args.sigma_floor,
        polish_digits=args.digits,
    )
    report = census(sample, opts)
    _write(args, report.to_json())
    return EXIT_OK


def cmd_manyhills(args) -> int:
    if args.K < 2:
        raise UsageError(f"--K must be >= 2, got {args.K}")
    _check_digits(args.digits)
    rows = manyhills.run_manyhills(args.K, _em_options(args), args.digits)
    if args.format == "json":
        _write(args, manyhills.rows_to_json(args.K, rows))
    else:
        _write(args, manyhills.rows_to_csv(rows))
    failed = [r for r in rows if not r.accepted]
    for r in failed:
        print(f"row k={r.k} rejected: {r.failure} (box_violations={r.box_violations}, "
              f"em_status={r.status.value}, iterations={r.n_iter})", file=sys.stderr)
    return EXIT_ROW_FAILURE if failed else EXIT_OK


def cmd_toy(args) -> int:
    if not args.x > 0:
        raise UsageError(f"--x must be positive, got {args.x}")
    _check_digits(args.digits)
    if args.format == "csv":
        raise UsageError("toy writes JSON only")
    try:
        result = toy.solve_mu(args.x, args.digits)
    except NoInteriorRootError as exc:
        print(f"no interior root: {exc}", file=sys.stderr)
        return EXIT_NO_ROOT
    _write(args, result.to_json())
    return EXIT_OK


def cmd_surface(args) -> int:
    if not args.x > 0:
        raise UsageError(f"--x must be positive, got {args.x}")
    if len(args.mu_range) != 2 or not args.mu_range[0] < args.mu_range[1]:
        raise UsageError("--mu-range needs lo,hi with lo < hi")
    try:
        grid = toy.surface_grid(args.x, args.alpha_steps, tuple(args.mu_range), args.mu_steps)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        doc = {"x": grid.x, "rows": [{"alpha": a, "mu": m, "loglik": v} for a, m, v in grid.rows()]}
        _write(args, json.dumps(doc) + "\n")
    else:
        _write(args, grid.to_csv())
    return EXIT_OK


def cmd_unbounded(args) -> int:
    sample = _read(args.input)
    if sample.N < 2 or sample.std <= 0:
        raise InsufficientDataError("need at least two distinct observations")
    try:
        trace = toy.unboundedness_trace(sample, args.sigmas)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        _write(args, json.dumps([{"sigma1": s, "loglik": v} for s, v in trace], indent=2) + "\n")
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("sigma1", "loglik"))
        for s, v in trace:
            w.writerow([repr(s), repr(v)])
        _write(args, buf.getvalue())
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "census": cmd_census,
    "manyhills": cmd_manyhills,
    "toy": cmd_toy,
    "surface": cmd_surface,
    "unbounded": cmd_unbounded,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"gmmcrit {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, SampleFormatError, InsufficientDataError) as exc:
        print(f"gmmcrit {args.command}: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
