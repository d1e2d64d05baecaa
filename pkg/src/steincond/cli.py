"""Command-line entry point: ``steincond <command> ...``.

Exit codes: 0 success, 2 input error, 3 numerical failure. Errors are also
written to stderr as a one-line JSON object with a ``code`` field.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .bounds import bound_report
from .colored import NoiseModel, ar1, colored_condition_bound, ma1, white
from .core import EnsembleSpec, ENSEMBLE_KINDS, InputPair, Spectrum, SteinError, build_jordan
from .lab import TABLE_IDS, emit_table, run_ensemble
from .normal_form import in_residual, to_input_normal
from .stein import solve_stein

EXIT_INPUT = 2
EXIT_NUMERIC = 3


class InputError(Exception):
    pass


def _load_json(path: str) -> dict:
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None


def _load_pair(path: str) -> InputPair:
    try:
        return InputPair.from_json(_load_json(path))
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_solve(args) -> int:
    pair = _load_pair(args.pair)
    sol = solve_stein(pair, args.method)
    doc = sol.to_json()
    doc["method"] = args.method
    _write(args, _dump(doc))
    return 0


def cmd_bounds(args) -> int:
    if args.pair:
        pair = _load_pair(args.pair)
        report = bound_report(pair.a, pair=pair, solve=args.solve)
    else:
        if args.solve:
            raise InputError("--solve needs --pair")
        if args.spectrum:
            try:
                spec = Spectrum.from_json(_load_json(args.spectrum))
            except ValueError as exc:
                raise InputError(str(exc)) from None
            a = np.diag(spec.eigenvalues)
        elif args.jordan is not None:
            if args.n is None:
                raise InputError("--jordan needs --n")
            try:
                a = build_jordan(args.jordan, args.n)
            except ValueError as exc:
                raise InputError(str(exc)) from None
        else:
            raise InputError("give one of --pair, --spectrum or --jordan")
        if not 1 <= args.d <= a.shape[0]:
            raise InputError("need 1 <= d <= n")
        report = bound_report(a, args.d)
    _write(args, _dump(report.to_json()))
    return 0


def cmd_normalize(args) -> int:
    pair = _load_pair(args.pair)
    tr = to_input_normal(pair)
    doc = tr.to_json()
    doc["in_residual"] = in_residual(tr.pair)
    _write(args, _dump(doc))
    return 0


def cmd_ensemble(args) -> int:
    try:
        spec = EnsembleSpec(args.kind, args.n, args.d, args.samples or 2500, args.seed,
                            jordan_lambda=args.jordan_lambda)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    records = run_ensemble(spec, args.workers)
    if args.format == "json":
        _write(args, _dump([r.to_json() for r in records]))
        return 0
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "log_kappa", "bound_log", "rejections", "error"])
    for r in records:
        w.writerow([r.index, repr(r.log_kappa),
                    "" if r.bound_log is None else repr(r.bound_log),
                    r.rejections, r.error or ""])
    _write(args, buf.getvalue())
    return 0


def cmd_table(args) -> int:
    _write(args, emit_table(args.table_id, args.seed, args.samples, args.workers, args.format))
    return 0


def cmd_colored(args) -> int:
    pair = _load_pair(args.pair)
    if pair.d != 1:
        raise InputError("colored forcing needs a single-input pair")
    try:
        noise: NoiseModel = {"white": lambda: white(), "ar1": lambda: ar1(args.param),
                             "ma1": lambda: ma1(args.param)}[args.noise]()
    except ValueError as exc:
        raise InputError(str(exc)) from None
    lhs, rhs = colored_condition_bound(pair, noise)
    doc = {"noise": noise.to_json(), "log_kappa_w": lhs, "bound": rhs, "holds": lhs <= rhs + 1e-6}
    _write(args, _dump(doc))
    return 0


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=None)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=("csv", "json", "md"), default="csv")
    common.add_argument("--out", default=None, help="write to this path instead of stdout")

    p = argparse.ArgumentParser(prog="steincond", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", parents=[common], help="solve P - APA* = BB* for a pair file")
    s.add_argument("pair")
    s.add_argument("--method", choices=("direct", "doubling"), default="doubling")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("bounds", parents=[common], help="evaluate lower bounds on kappa(P)")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--pair")
    g.add_argument("--spectrum")
    g.add_argument("--jordan", type=float, metavar="LAMBDA")
    s.add_argument("--n", type=int)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--solve", action="store_true", help="also solve and report the gap")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("normalize", parents=[common], help="transform a pair to input-normal form")
    s.add_argument("pair")
    s.set_defaults(func=cmd_normalize)

    s = sub.add_parser("ensemble", parents=[common], help="per-sample ln kappa for one ensemble")
    s.add_argument("--kind", choices=ENSEMBLE_KINDS, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, default=1)
    s.add_argument("--lambda", dest="jordan_lambda", type=float, default=None)
    s.set_defaults(func=cmd_ensemble)

    s = sub.add_parser("table", parents=[common], help="reproduce one quantile table")
    s.add_argument("table_id", choices=TABLE_IDS)
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("colored", parents=[common], help="state covariance under colored noise")
    s.add_argument("pair")
    s.add_argument("--noise", choices=("white", "ar1", "ma1"), default="ar1")
    s.add_argument("--param", type=float, default=0.5)
    s.set_defaults(func=cmd_colored)
    return p


def _fail(code: str, message: str, status: int) -> int:
    sys.stderr.write(json.dumps({"error": code, "message": message}) + "\n")
    return status


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        return _fail("input", "--workers must be at least 1", EXIT_INPUT)
    try:
        return args.func(args)
    except InputError as exc:
        return _fail("input", str(exc), EXIT_INPUT)
    except SteinError as exc:
        return _fail(exc.code, str(exc), EXIT_NUMERIC)
    except ValueError as exc:
        return _fail("input", str(exc), EXIT_INPUT)


if __name__ == "__main__":
    raise SystemExit(main())
