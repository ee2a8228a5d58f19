"""Command-line front end: spectra, cross-checks, epsilon sweeps and complex scans.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
Failures print one JSON error record on standard error.  Output is CSV
(header, ',' separator, LF endings) or a JSON array of the same records;
floats use the shortest round-trip representation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from .analysis import MATCH_TOL, build_cross_report
from .eigensolver import DEFAULT_CLOSURE, eigen_all, filter_stable, matrix_spectrum
from .exceptions import (ConvergenceError, FactorizationError, FitError, ResonantEpsilonError,
                         SingularNormalizationError)
from .heun import connection_at
from .operator import CLOSURES, build_truncated, validate_epsilon
from .recurrence import complex_scan, find_real_roots
from .sturm_liouville import assemble, lambda_from_mu, sl_spectrum

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2

NUMERICAL_ERRORS = (ConvergenceError, FactorizationError, SingularNormalizationError, FitError,
                    ArithmeticError, np.linalg.LinAlgError)

SPECTRUM_FIELDS = ["epsilon", "N", "index", "re_lambda", "im_lambda", "residual", "stable",
                   "decay_slope"]
CROSS_FIELDS = ["epsilon", "index", "re_lambda_matrix", "im_lambda_matrix", "lambda_shooting",
                "lambda_sl", "connection_ratio", "decay_slope", "discrepancy", "complete",
                "missing_routes"]
SWEEP_FIELDS = ["epsilon", "k", "lambda_k", "im_lambda_k"]
SCAN_FIELDS = ["epsilon", "index", "re_lambda", "im_lambda", "hits"]


class UsageError(Exception):
    """Invalid command line or configuration (exit code 1)."""


class NumericalFailure(Exception):
    """A run completed but failed its numerical gate (exit code 2)."""

    def __init__(self, message, **detail):
        super().__init__(message)
        self.detail = detail


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------- formatting

def _cell(value):
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render(records, fields, fmt):
    """Serialize records to CSV or JSON text."""
    if fmt == "json":
        rows = [{k: _json_value(r.get(k)) for k in fields} for r in records]
        return json.dumps(rows, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for r in records:
        w.writerow([_cell(r.get(k)) for k in fields])
    return buf.getvalue()


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _error_record(kind, message, code, **detail):
    rec = {"error": kind, "message": message, "exit_code": code}
    rec.update({k: _json_value(v) for k, v in detail.items()})
    sys.stderr.write(json.dumps(rec, ensure_ascii=False) + "\n")


# ---------------------------------------------------------------- pipelines

def _epsilons(values, theorem=False, allow_integer_inverse=False):
    if not values:
        raise UsageError("at least one --epsilon is required")
    out = []
    for v in values:
        try:
            out.append(validate_epsilon(v, theorem=theorem and not allow_integer_inverse))
        except ResonantEpsilonError as exc:
            raise UsageError(f"{exc}; pass --allow-integer-inverse to override") from exc
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    return out


def spectrum_records(epsilon, N, closure="none", tol=1e-8):
    """All eigenvalues of the N section, flagged stable against the 2N section."""
    small = eigen_all(build_truncated(epsilon, N, closure), want_vectors=True)
    large = eigen_all(build_truncated(epsilon, 2 * N, closure))
    stable = {complex(p.lam) for p in filter_stable(small, large, tol)}
    rows = []
    for k, p in enumerate(small.pairs, start=1):
        lam = complex(p.lam)
        rows.append({"epsilon": epsilon, "N": N, "index": k, "re_lambda": lam.real,
                     "im_lambda": lam.imag, "residual": p.residual, "stable": lam in stable,
                     "decay_slope": p.decay_slope})
    return rows


def crosscheck_report(epsilon, N=1000, K=200, count=10, tol=1e-8, closure=DEFAULT_CLOSURE,
                      interval=None, allow_integer_inverse=False):
    """Run all routes at one epsilon and match them into a cross report."""
    ms = matrix_spectrum(epsilon, N, tol, closure)
    sys_ = assemble(epsilon, K)
    mus = sl_spectrum(sys_, min(count, K))
    sl = [lambda_from_mu(epsilon, m) for m in mus]
    if interval is None:
        interval = (0.0, 1.05 * max(sl) + 1.0)
    roots = find_real_roots(epsilon, interval)[:count]
    conn = {}
    for r in roots:
        fit = connection_at(epsilon, r, allow_resonant=allow_integer_inverse)
        conn[r] = fit.ratio
    return build_cross_report(epsilon, ms.stable, roots, sl, conn, MATCH_TOL)


def cross_records(report):
    recs = report.records()
    for rec, row in zip(recs, report.rows):
        missing = [name for name in ("matrix", "shooting", "sl") if getattr(row, name) is None]
        rec["missing_routes"] = " ".join(missing)
    return recs


def cross_failure(report, gate):
    """First row violating the gate as ``(index, reason)``, or None."""
    if not any(r.matrix is not None for r in report.rows):
        return 0, "no stable matrix eigenvalues"
    for k, row in enumerate(report.rows, start=1):
        if row.discrepancy > gate:
            return k, f"discrepancy {row.discrepancy!r} exceeds gate {gate!r}"
        if row.matrix is not None and abs(complex(row.matrix).imag) > gate:
            return k, f"|Im lambda| {abs(complex(row.matrix).imag)!r} exceeds gate {gate!r}"
    return None


# ---------------------------------------------------------------- commands

def cmd_spectrum(args):
    eps_list = _epsilons(args.epsilon)
    if args.size < 1:
        raise UsageError("--size must be a positive integer")
    rows = []
    for eps in eps_list:
        rows.extend(spectrum_records(eps, args.size, args.closure, args.tol))
    _emit(render(rows, SPECTRUM_FIELDS, args.format), args.out)
    return EXIT_OK


def cmd_crosscheck(args):
    eps_list = _epsilons(args.epsilon, theorem=True,
                         allow_integer_inverse=args.allow_integer_inverse)
    if args.size < 1 or args.galerkin < 1 or args.count < 1:
        raise UsageError("--size, --galerkin and --count must be positive integers")
    rows, failure = [], None
    for eps in eps_list:
        report = crosscheck_report(eps, args.size, args.galerkin, args.count, args.tol,
                                   args.closure, args.interval, args.allow_integer_inverse)
        rows.extend(cross_records(report))
        bad = cross_failure(report, args.gate)
        if bad is not None and failure is None:
            failure = (eps, *bad)
    _emit(render(rows, CROSS_FIELDS, args.format), args.out)
    if failure is not None:
        eps, index, reason = failure
        raise NumericalFailure(reason, epsilon=eps, row=index)
    return EXIT_OK


def _sibling(out, eps, fmt):
    p = Path(out)
    suffix = p.suffix or f".{fmt}"
    return p.with_name(f"{p.stem}.eps{eps!r}{suffix}")


def cmd_sweep(args):
    eps_list = sorted(set(_epsilons(args.epsilon)))
    if args.size < 1:
        raise UsageError("--size must be a positive integer")
    agg, failed = [], []
    for eps in eps_list:
        try:
            rows = spectrum_records(eps, args.size, args.closure, args.tol)
        except NUMERICAL_ERRORS as exc:
            failed.append((eps, str(exc)))
            continue
        if args.out not in (None, "-"):
            _emit(render(rows, SPECTRUM_FIELDS, args.format), _sibling(args.out, eps, args.format))
        stable = [r for r in rows if r["stable"]]
        for k, r in enumerate(stable, start=1):
            agg.append({"epsilon": eps, "k": k, "lambda_k": r["re_lambda"],
                        "im_lambda_k": r["im_lambda"]})
    _emit(render(agg, SWEEP_FIELDS, args.format), args.out)
    if failed:
        raise NumericalFailure("sweep failed for some epsilon values",
                               failed=[{"epsilon": e, "message": m} for e, m in failed])
    return EXIT_OK


def cmd_scan(args):
    eps_list = _epsilons(args.epsilon)
    re_lo, re_hi, im_lo, im_hi = args.rect
    if not (re_lo < re_hi and im_lo < im_hi):
        raise UsageError("--rect needs RE_LO < RE_HI and IM_LO < IM_HI")
    rows = []
    for eps in eps_list:
        res = complex_scan(eps, args.rect, tuple(args.grid), gate=args.gate)
        for k, (r, h) in enumerate(zip(res.roots, res.hits), start=1):
            rows.append({"epsilon": eps, "index": k, "re_lambda": r.real, "im_lambda": r.imag,
                         "hits": int(h)})
    _emit(render(rows, SCAN_FIELDS, args.format), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _common(p, closure_default):
    p.add_argument("--epsilon", "-e", action="append", type=float, default=[],
                   help="model parameter in (0, 2); repeatable")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", "-o", default="-", help="output file ('-' for stdout)")
    if closure_default is not None:
        p.add_argument("--closure", choices=CLOSURES, default=closure_default,
                       help=f"last-row closure of the truncated matrix (default {closure_default})")


def build_parser():
    parser = _Parser(prog="bos-spectrum", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("spectrum", help="eigenvalues of one truncation, flagged against 2N")
    _common(p, "none")
    p.add_argument("--size", "-N", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-8, help="N vs 2N matching tolerance")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("crosscheck", help="matrix, shooting, Galerkin and connection routes")
    _common(p, DEFAULT_CLOSURE)
    p.add_argument("--size", "-N", type=int, default=1000)
    p.add_argument("--galerkin", "-K", type=int, default=200)
    p.add_argument("--count", type=int, default=10, help="eigenvalues per route")
    p.add_argument("--tol", type=float, default=1e-8, help="N vs 2N matching tolerance")
    p.add_argument("--gate", type=float, default=1e-6,
                   help="largest allowed discrepancy and |Im lambda|")
    p.add_argument("--interval", type=float, nargs=2, metavar=("LO", "HI"), default=None,
                   help="shooting search interval (default from the Galerkin eigenvalues)")
    p.add_argument("--allow-integer-inverse", action="store_true",
                   help="accept epsilon with integer 1/epsilon")
    p.set_defaults(func=cmd_crosscheck)

    p = sub.add_parser("sweep", help="stable eigenvalues over a list of epsilon values")
    _common(p, DEFAULT_CLOSURE)
    p.add_argument("--size", "-N", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scan", help="Newton scan for complex eigenvalues in a rectangle")
    _common(p, None)
    p.add_argument("--rect", type=float, nargs=4, metavar=("RE_LO", "RE_HI", "IM_LO", "IM_HI"),
                   default=[0.0, 12.0, -4.0, 4.0])
    p.add_argument("--grid", type=int, nargs=2, metavar=("NX", "NY"), default=[40, 20])
    p.add_argument("--gate", type=float, default=1e-11)
    p.set_defaults(func=cmd_scan)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _error_record("UsageError", str(exc), EXIT_USAGE)
        return EXIT_USAGE
    except NumericalFailure as exc:
        _error_record("NumericalFailure", str(exc), EXIT_NUMERICAL, **exc.detail)
        return EXIT_NUMERICAL
    except NUMERICAL_ERRORS as exc:
        _error_record(type(exc).__name__, str(exc), EXIT_NUMERICAL,
                      index=getattr(exc, "index", None))
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
