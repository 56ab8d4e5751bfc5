"""Command-line front end.

Exit codes: 0 success / inequality satisfied / outcome as expected,
1 inequality violated / golden mismatch / unexpected fuzz outcome,
2 malformed input, failed hypothesis or bad flags.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from datetime import datetime, timezone

from . import __version__
from .errors import InputError, PreconditionError, UnsupportedExponentError
from .fuzz import SUITES, FuzzConfig, run_suite
from .inequalities import (
    check_cohen_spectral,
    check_cohen_spectral_multi,
    check_mixed_numrad,
    check_norm_corollary,
    check_norm_multi,
    check_numrad_corollary,
    check_numrad_multi,
    rank_one_cohen,
    replicate_example1,
    replicate_example2,
    replicate_rank_one,
)
from .measure import Exponent, MeasurableFunction, MeasureSpace
from .numrad import numerical_radius
from .serialize import (
    complex_vector,
    function_from_json,
    loads,
    matrix_from_json,
    multiplication_from_json,
)
from .spectral import norm2_report, operator_norm, operator_norm_estimate, spectral_radius

INEQUALITIES = ("cohen", "cohen-multi", "norm", "norm-corollary", "numrad",
                "numrad-corollary", "mixed", "rank-one")
EXIT_OK, EXIT_VIOLATED, EXIT_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _read_json(value: str, what: str):
    """Inline JSON, a path to a JSON file, or '-' for stdin."""
    if value == "-":
        text = sys.stdin.read()
    elif os.path.isfile(value):
        with open(value) as fh:
            text = fh.read()
    else:
        text = value
    try:
        return loads(text)
    except InputError as exc:
        raise InputError(f"{what}: {exc}") from exc


def _manifest(args, inputs: dict, config: dict) -> dict:
    return {
        "command": args.command,
        "inputs": inputs,
        "config": config,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def _emit(payload: dict, args, csv_rows=None, out_path=None):
    if getattr(args, "format", "json") == "csv" and csv_rows is not None:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in csv_rows:
            writer.writerow(row)
        text = buf.getvalue()
    else:
        text = json.dumps(payload, indent=2, allow_nan=False) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _matrix(args):
    if args.matrix is None:
        raise InputError("--matrix is required")
    weights = _read_json(args.weights, "--weights") if args.weights else None
    return matrix_from_json(_read_json(args.matrix, "--matrix"), weights)


# -- compute -----------------------------------------------------------------

def cmd_compute(args) -> int:
    A = _matrix(args)
    if args.functional == "norm":
        p = Exponent.parse(args.p)
        if p.is_infinite or p.value == 1.0:
            payload = {"value": operator_norm(A, p), "method": "closed-form", "convergence": None}
        elif p.value == 2.0:
            rep = norm2_report(A)
            payload = {"value": rep.value, "method": rep.method, "convergence": rep.to_dict()}
        else:
            rep = operator_norm_estimate(A, p, restarts=args.restarts, seed=args.seed)
            payload = {"value": rep.value, "method": rep.method, "convergence": rep.to_dict()}
    elif args.functional == "specrad":
        rep = spectral_radius(A, args.tol)
        payload = {"value": rep.value, "method": rep.method, "convergence": rep.to_dict()}
    else:
        res = numerical_radius(A)
        payload = {"value": res.value, "method": res.method, "convergence": res.to_dict()}
    inputs = {"matrix": args.matrix, "weights": args.weights}
    config = {"functional": args.functional, "p": args.p, "tol": args.tol}
    out = {"manifest": _manifest(args, inputs, config), **payload}
    _emit(out, args, [["functional", "value", "method"],
                      [args.functional, payload["value"], payload["method"]]])
    return EXIT_OK


# -- check -------------------------------------------------------------------

def _symbols(args, space):
    if args.symbols is not None:
        data = _read_json(args.symbols, "--symbols")
        if not isinstance(data, list):
            raise InputError("--symbols must be a JSON array of symbols")
        return [multiplication_from_json(s, space) for s in data]
    if args.symbol is not None:
        return [multiplication_from_json(_read_json(args.symbol, "--symbol"), space)]
    raise InputError("--symbol (or --symbols for multi checks) is required")


def _single(Ds):
    if len(Ds) != 1:
        raise InputError("this check takes exactly one multiplication operator (--symbol)")
    return Ds[0]


def _run_check(args):
    name = args.inequality
    tol, unchecked = args.tol, args.unchecked
    if name == "rank-one":
        weights = _read_json(args.weights, "--weights") if args.weights else None
        if args.u is None or args.v is None or args.phi is None:
            raise InputError("rank-one needs --u, --v and --phi")
        u = function_from_json(_read_json(args.u, "--u"))
        if weights is not None:
            u = MeasurableFunction(MeasureSpace(weights), u.values)
        v = MeasurableFunction(u.space, complex_vector(_read_json(args.v, "--v")))
        phi = MeasurableFunction(u.space, complex_vector(_read_json(args.phi, "--phi")))
        return rank_one_cohen(u, v, phi, tol)
    A = _matrix(args)
    Ds = _symbols(args, A.space)
    if name == "cohen":
        return check_cohen_spectral(A, _single(Ds), tol, unchecked)
    if name == "cohen-multi":
        return check_cohen_spectral_multi(A, Ds, tol, unchecked)
    if name == "norm":
        return check_norm_multi(A, Ds, args.p, args.side, tol, unchecked)
    if name == "norm-corollary":
        return check_norm_corollary(A, _single(Ds), args.p, args.side, tol, unchecked)
    if name == "numrad":
        return check_numrad_multi(A, Ds, args.side, tol, unchecked)
    if name == "numrad-corollary":
        return check_numrad_corollary(A, _single(Ds), args.side, tol, unchecked)
    return check_mixed_numrad(A, _single(Ds), tol, unchecked)


def cmd_check(args) -> int:
    report = _run_check(args)
    inputs = {k: getattr(args, k) for k in ("matrix", "weights", "symbol", "symbols", "u", "v", "phi")
              if getattr(args, k) is not None}
    config = {"inequality": args.inequality, "p": args.p, "side": args.side, "tol": args.tol,
              "unchecked": args.unchecked}
    out = {"manifest": _manifest(args, inputs, config), "report": report.to_dict()}
    rows = [["name", "lhs", "rhsProduct", "marginRatio", "satisfied"],
            [report.name, report.lhs, report.rhs_product,
             "inf" if report.infinite_margin else report.margin_ratio, report.satisfied]]
    _emit(out, args, rows)
    return EXIT_OK if report.satisfied else EXIT_VIOLATED


# -- replicate -----------------------------------------------------------------

def cmd_replicate(args) -> int:
    if args.target == "example1":
        rep = replicate_example1()
    elif args.target == "example2":
        rep = replicate_example2(args.d)
    else:
        u = complex_vector(_read_json(args.u, "--u")).real.tolist() if args.u else None
        v = complex_vector(_read_json(args.v, "--v")).real.tolist() if args.v else None
        weights = _read_json(args.weights, "--weights") if args.weights else None
        n = len(u) if u is not None else (len(weights) if weights is not None else 2)
        if args.phi is not None:
            phi = complex_vector(_read_json(args.phi, "--phi")).tolist()
        elif args.phi_const is not None:
            phi = [args.phi_const] * n
        else:
            phi = None
        rep = replicate_rank_one(u, v, phi, weights)
    config = {"target": args.target, "d": args.d, "phiConst": args.phi_const}
    out = {"manifest": _manifest(args, {}, config), **rep.to_dict()}
    rows = [["name", "value", "expected", "ok"]] + [
        [c["name"], json.dumps(c["value"]), json.dumps(c["expected"]), c["ok"]] for c in rep.constants]
    _emit(out, args, rows)
    for bad in rep.mismatches():
        print(f"mismatch: {bad['name']} = {bad['value']!r}, expected {bad['expected']!r} "
              f"(tol {bad['tol']})", file=sys.stderr)
    return EXIT_OK if rep.ok else EXIT_VIOLATED


# -- fuzz ----------------------------------------------------------------------

def cmd_fuzz(args) -> int:
    config = FuzzConfig(
        seed=args.seed, trials=args.trials, n_min=args.dim_min, n_max=args.dim_max,
        entry_scale=args.entry_scale, diagonal_log_range=args.log_range, density=args.density,
        m=args.m, m_min=args.m_min, p=args.p, tolerance=args.tol,
        weighted=not args.unweighted, identity_family=args.identity_family,
        max_witnesses=args.max_witnesses,
    )
    result = run_suite(args.suite, config)
    out = {"manifest": _manifest(args, {}, {"suite": args.suite, **config.to_dict()}),
           **result.to_dict()}
    rows = [["kind", "trial", "marginRatio"]]
    if result.arg_min is not None:
        rows.append(["argMin", result.arg_min["trial"], result.arg_min["marginRatio"]])
    for v in result.violations:
        rows.append(["violation", v["trial"], v["report"]["marginRatio"]])
    _emit(out, args, rows, args.out)
    if args.out and result.violations:
        with open(args.out + ".violations.json", "w") as fh:
            json.dump(result.violations, fh, indent=2)
    return EXIT_OK if result.outcome_matches_expectation else EXIT_VIOLATED


# -- parser ----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cohenlab", description="Cohen-type operator inequality laboratory")
    parser.add_argument("--version", action="version", version=f"cohenlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def matrix_args(p):
        p.add_argument("--matrix", help="operator JSON: inline, file path, or '-' for stdin")
        p.add_argument("--weights", help="atom weights as a JSON array (default: counting measure)")

    c = sub.add_parser("compute", help="evaluate a norm, numerical radius or spectral radius")
    matrix_args(c)
    c.add_argument("--functional", choices=("norm", "numrad", "specrad"), required=True)
    c.add_argument("--p", default="2", help="exponent for --functional norm (1, 2, inf, or 1<p<inf)")
    c.add_argument("--tol", type=float, default=1e-12)
    c.add_argument("--restarts", type=int, default=8)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--format", choices=("json", "csv"), default="json")
    c.set_defaults(func=cmd_compute)

    k = sub.add_parser("check", help="check one inequality instance")
    k.add_argument("inequality", choices=INEQUALITIES)
    matrix_args(k)
    k.add_argument("--symbol", help="multiplication operator symbol (JSON)")
    k.add_argument("--symbols", help="JSON array of symbols for multi-factor checks")
    k.add_argument("--u")
    k.add_argument("--v")
    k.add_argument("--phi")
    k.add_argument("--p", default="2")
    k.add_argument("--side", choices=("left", "right"), default="left")
    k.add_argument("--tol", type=float, default=1e-9)
    k.add_argument("--unchecked", action="store_true",
                   help="skip hypothesis checks (for counterexamples)")
    k.add_argument("--format", choices=("json", "csv"), default="json")
    k.set_defaults(func=cmd_check)

    r = sub.add_parser("replicate", help="recompute the worked examples against golden values")
    r.add_argument("target", choices=("example1", "example2", "rank-one"))
    r.add_argument("--d", type=float, default=0.5)
    r.add_argument("--phi-const", type=float)
    r.add_argument("--u")
    r.add_argument("--v")
    r.add_argument("--phi")
    r.add_argument("--weights")
    r.add_argument("--format", choices=("json", "csv"), default="json")
    r.set_defaults(func=cmd_replicate)

    f = sub.add_parser("fuzz", help="run a seeded randomized suite")
    f.add_argument("suite", choices=sorted(SUITES))
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--trials", type=int, default=1000)
    f.add_argument("--dim-min", type=int, default=2)
    f.add_argument("--dim-max", type=int, default=6)
    f.add_argument("--m", type=int, default=2)
    f.add_argument("--m-min", type=int)
    f.add_argument("--p", default="2")
    f.add_argument("--tol", type=float)
    f.add_argument("--density", type=float, default=1.0)
    f.add_argument("--log-range", type=float, default=2.0)
    f.add_argument("--entry-scale", type=float, default=1.0)
    f.add_argument("--unweighted", action="store_true")
    f.add_argument("--identity-family", action="store_true")
    f.add_argument("--max-witnesses", type=int, default=100)
    f.add_argument("--out")
    f.add_argument("--format", choices=("json", "csv"), default="json")
    f.set_defaults(func=cmd_fuzz)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (InputError, UnsupportedExponentError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
