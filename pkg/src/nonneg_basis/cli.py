"""Command line front end (``nonneg-basis``).

Exit codes: 0 success, 1 verification violations, 2 bad input or flags,
3 I/O failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from .basis import DEFAULT_BASIS, Expansion
from .stepfn import StepFunction, format_rational
from .suites import SUITES, resolve_threads, run_suite

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _read_json(path: str):
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON: {exc}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _load_function(path: str) -> StepFunction:
    try:
        return StepFunction.from_json(_read_json(path))
    except (ValueError, TypeError) as exc:
        raise CliError(f"{path}: {exc}") from None


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def cmd_basis_show(args) -> int:
    if args.index < 1:
        raise CliError("index must be ≥ 1")
    blk = DEFAULT_BASIS.block(args.index)
    if args.format == "json":
        _write(args.output, _dump(blk.to_json()))
        return EXIT_OK
    rows = []
    for name in ("u", "x", "y"):
        f = getattr(blk, name)
        width = 1 << f.resolution
        for t, v in enumerate(f.values):
            rows.append([name, t, format_rational(Fraction(t, width)),
                         format_rational(Fraction(t + 1, width)), format_rational(v)])
    meta = f"# i={blk.i} pi={blk.pi_i} haar=j{blk.haar.j},n{blk.haar.n},i{blk.haar.i}\n"
    _write(args.output, meta + _csv_text(["function", "cell", "left", "right", "value"], rows))
    return EXIT_OK


def cmd_analyze(args) -> int:
    f = _load_function(args.input)
    expansion = DEFAULT_BASIS.analyze(f)
    if args.kmax is not None:
        if args.kmax < 0:
            raise CliError("kmax must be >= 0")
        expansion = expansion.truncate(args.kmax)
    _write(args.output, _dump(expansion.to_json()))
    return EXIT_OK


def cmd_synthesize(args) -> int:
    data = _read_json(args.input)
    try:
        expansion = Expansion.from_json(data)
    except (ValueError, TypeError) as exc:
        raise CliError(f"{args.input}: {exc}") from None
    if expansion.permutation != DEFAULT_BASIS.permutation.name:
        raise CliError(f"unsupported permutation {expansion.permutation!r}")
    _write(args.output, _dump(DEFAULT_BASIS.synthesize(expansion).to_json()))
    return EXIT_OK


def cmd_partial_sums(args) -> int:
    f = _load_function(args.input)
    if args.kmax is not None and args.kmax < 1:
        raise CliError("kmax must be >= 1")
    try:
        profile = DEFAULT_BASIS.basis_constant_profile(f, args.kmax)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    rows = [[k, format_rational(r), repr(float(r))] for k, r in enumerate(profile, start=1)]
    _write(args.output, _csv_text(["K", "ratio", "ratio_float"], rows))
    return EXIT_OK


def cmd_verify(args) -> int:
    suites = list(SUITES) if "all" in args.suites else args.suites
    for name in suites:
        if name not in SUITES:
            raise CliError(f"unknown suite {name!r}; choose from {', '.join(SUITES)} or all")
    if args.trials < 1:
        raise CliError("trials must be >= 1")
    if args.imax is not None and args.imax < 1:
        raise CliError("imax must be >= 1")
    if args.p is not None and args.p < 1:
        raise CliError("p must be >= 1")
    if not 0 <= args.seed < 1 << 64:
        raise CliError("seed must be an unsigned 64-bit integer")
    try:
        threads = resolve_threads(args.threads)
    except ValueError:
        raise CliError(f"invalid thread count {args.threads!r}") from None
    reports = [run_suite(name, trials=args.trials, seed=args.seed, threads=threads,
                         imax=args.imax, p=args.p, keep_witness=args.witness)
               for name in suites]
    reports.sort(key=lambda r: r.check_name)
    if args.format == "json":
        text = "".join(json.dumps(r.to_json()) + "\n" for r in reports)
    else:
        rows = [[r.check_name, r.trials, r.violations, r.to_json()["worst_margin"]]
                for r in reports]
        text = _csv_text(["check", "trials", "violations", "worst_margin"], rows)
    _write(args.output, text)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonneg-basis",
        description="Non-negative Schauder basis of L1(0, oo): expansions and checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    basis = sub.add_parser("basis", help="inspect basis blocks")
    basis_sub = basis.add_subparsers(dest="basis_command", required=True)
    show = basis_sub.add_parser("show", help="print block i: u_i, x_i, y_i, pi(i), h_i")
    show.add_argument("--index", type=int, required=True)
    show.add_argument("--format", choices=("json", "csv"), default="json")
    show.add_argument("--output")
    show.set_defaults(func=cmd_basis_show)

    an = sub.add_parser("analyze", help="expand a step function in the basis")
    an.add_argument("--input", required=True)
    an.add_argument("--output")
    an.add_argument("--kmax", type=int, help="keep only the first K Schauder coefficients")
    an.set_defaults(func=cmd_analyze)

    syn = sub.add_parser("synthesize", help="rebuild a step function from an expansion")
    syn.add_argument("--input", required=True)
    syn.add_argument("--output")
    syn.set_defaults(func=cmd_synthesize)

    ps = sub.add_parser("partial-sums", help="write the partial-sum norm profile as CSV")
    ps.add_argument("--input", required=True)
    ps.add_argument("--kmax", type=int)
    ps.add_argument("--output")
    ps.set_defaults(func=cmd_partial_sums)

    ver = sub.add_parser("verify", help="run verification suites")
    ver.add_argument("suites", nargs="+", metavar="suite",
                     help=f"one or more of: {', '.join(SUITES)}, all")
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--threads", default=None,
                     help="worker count or 'auto' (default: $NONNEG_BASIS_THREADS or 1)")
    ver.add_argument("--imax", type=int)
    ver.add_argument("--p", type=float)
    ver.add_argument("--format", choices=("json", "csv"), default="json")
    ver.add_argument("--output")
    ver.add_argument("--witness", action="store_true",
                     help="include the worst trial's inputs even without violations")
    ver.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"nonneg-basis: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
