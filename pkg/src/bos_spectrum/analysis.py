"""Decay diagnostics for eigenvectors and cross-route comparison reports."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .exceptions import FitError

__all__ = [
    "weighted_sup_norm",
    "default_fit_range",
    "decay_slope",
    "powerlaw_tail",
    "DecayBound",
    "davies_fit",
    "Ell1Tail",
    "ell1_tail",
    "CrossRow",
    "CrossReport",
    "build_cross_report",
    "MATCH_TOL",
]

MATCH_TOL = 1e-4
MIN_FIT_POINTS = 5


def _values(v):
    vals = getattr(v, "v", None)
    if vals is None:
        vals = getattr(v, "vector", v)
    return np.asarray(vals)


def weighted_sup_norm(v, c) -> float:
    """``max_n |v_n| n**c`` with ``v_n`` stored at position ``n - 1``."""
    a = np.abs(_values(v)).astype(float)
    n = np.arange(1, a.size + 1, dtype=float)
    return float(np.max(a * n**c)) if a.size else 0.0


def default_fit_range(size):
    """Index range ``[10, size // 4]`` (1-based, inclusive)."""
    return 10, max(size // 4, 10)


def _fit(v, fit_range):
    a = np.abs(_values(v)).astype(float)
    lo, hi = default_fit_range(a.size) if fit_range is None else fit_range
    lo = max(int(lo), 1)
    hi = min(int(hi), a.size)
    n = np.arange(lo, hi + 1)
    y = a[lo - 1:hi]
    keep = np.isfinite(y) & (y > 0)
    if keep.sum() < MIN_FIT_POINTS:
        raise FitError(
            f"only {int(keep.sum())} usable points in index range [{lo}, {hi}]; "
            f"need at least {MIN_FIT_POINTS}")
    x = np.log(n[keep])
    slope, intercept = np.polyfit(x, np.log(y[keep]), 1)
    return float(slope), float(intercept)


def decay_slope(v, fit_range=None) -> float:
    """Least-squares slope of ``log|v_n|`` against ``log n``.

    Parameters
    ----------
    v : sequence, CoefficientSequence or EigenPair
    fit_range : (int, int), optional
        Inclusive 1-based index range; defaults to ``[10, N/4]``.  Zero or
        non-finite entries are skipped.

    Raises
    ------
    FitError
        Fewer than five usable points.
    """
    return _fit(v, fit_range)[0]


def powerlaw_tail(absv, fit_range=None) -> float:
    """Integral bound on ``sum_{n > N} |v_n|`` from a power-law fit.

    Returns 0 for a sequence with trailing zeros (finite support) and
    ``inf`` when the fitted slope is not below -1.
    """
    a = np.abs(np.asarray(absv, dtype=float))
    if a.size == 0 or a[-1] == 0.0:
        return 0.0
    slope, intercept = _fit(a, fit_range)
    if slope >= -1.0:
        return math.inf
    N = a.size
    # integral of C x**s over [N, inf)
    return float(math.exp(intercept) * N ** (slope + 1.0) / (-slope - 1.0))


@dataclass(frozen=True)
class Ell1Tail:
    """Sum of ``|v_n|`` over the computed indices plus a bound on the rest."""

    total: float
    tail_estimate: float
    summable: bool


def ell1_tail(v, fit_range=None) -> Ell1Tail:
    """Absolute sum with a power-law tail estimate; see :func:`powerlaw_tail`."""
    a = np.abs(_values(v)).astype(float)
    total = math.fsum(a)
    tail = powerlaw_tail(a, fit_range)
    return Ell1Tail(float(total), tail, math.isfinite(tail))


@dataclass(frozen=True)
class DecayBound:
    """Envelope ``||v||_{inf,c} <= b_fit * |lam|**m_fit`` over a set of eigenpairs.

    Attributes
    ----------
    c : float
        Weight exponent, ``1 + 1/eps``.
    b_fit, m_fit : float
    norms : ndarray
        Weighted sup norms of the (unit 2-norm) input vectors.
    lams : ndarray
        ``|lam|`` of each input pair.
    degenerate : bool
        All ``|lam|`` equal, so ``m_fit`` is arbitrary (set to 0).
    extrapolation_unsafe : bool
        ``|lam|`` spans less than one decade.
    log_b : float
        ``log(b_fit)``, kept because ``b_fit`` itself may under- or overflow
        when the lam values nearly coincide.
    """

    c: float
    b_fit: float
    m_fit: float
    norms: np.ndarray = field(repr=False)
    lams: np.ndarray = field(repr=False)
    degenerate: bool = False
    extrapolation_unsafe: bool = False
    log_b: float = 0.0

    def envelope(self, lam):
        with np.errstate(over="ignore"):
            return np.exp(self.log_b + self.m_fit * np.log(np.abs(lam)))


def _pair_data(pairs):
    lams, vecs = [], []
    for p in pairs:
        if hasattr(p, "lam"):
            lams.append(p.lam)
            vecs.append(p.vector)
        else:
            lam, vec = p
            lams.append(lam)
            vecs.append(vec)
    return np.abs(np.asarray(lams, dtype=complex)), vecs


def davies_fit(pairs, epsilon=None, norms=None) -> DecayBound:
    """Tightest power-law envelope of weighted sup norms against ``|lam|``.

    Solves the linear program: minimize the total log-gap
    ``sum(log b + m log|lam_i| - log norm_i)`` subject to every gap being
    non-negative.  Every input point therefore lies on or below the envelope.

    Parameters
    ----------
    pairs : sequence of EigenPair or (lam, vector)
        Vectors must be normalized to unit 2-norm.
    epsilon : float
        Sets ``c = 1 + 1/epsilon``.
    norms : array, optional
        Precomputed weighted norms; ``pairs`` may then be a plain list of lam.
    """
    if epsilon is None:
        raise ValueError("epsilon is required")
    c = 1.0 + 1.0 / float(epsilon)
    if norms is None:
        lam_abs, vecs = _pair_data(pairs)
        norms = np.array([weighted_sup_norm(v, c) for v in vecs])
    else:
        lam_abs = np.abs(np.asarray(pairs, dtype=complex))
        norms = np.asarray(norms, dtype=float)
    if lam_abs.size == 0:
        raise FitError("davies_fit needs at least one eigenpair")
    if np.any(lam_abs <= 0) or np.any(norms <= 0):
        raise FitError("eigenvalues and norms must be nonzero")
    x = np.log(lam_abs)
    y = np.log(norms)
    if np.ptp(x) == 0.0:
        return DecayBound(c, float(np.exp(y.max())), 0.0, norms, lam_abs, True, True,
                          float(y.max()))
    # variables (log b, m); constraints log b + m x_i >= y_i
    res = linprog(
        c=[x.size, x.sum()],
        A_ub=np.column_stack([-np.ones_like(x), -x]),
        b_ub=-y,
        bounds=[(None, None), (None, None)],
        method="highs",
    )
    if not res.success:
        raise FitError(f"envelope fit failed: {res.message}")
    logb, m = res.x
    # guard against solver round-off so the envelope property is exact
    logb += max(0.0, float(np.max(y - (logb + m * x))))
    unsafe = bool(np.ptp(x) < math.log(10.0))
    with np.errstate(over="ignore", under="ignore"):
        b = float(np.exp(logb))
    return DecayBound(c, b, float(m), norms, lam_abs, False, unsafe, float(logb))


ROUTES = ("matrix", "shooting", "sl")


@dataclass
class CrossRow:
    """One eigenvalue as seen by each route; missing routes are None."""

    matrix: complex | None = None
    shooting: float | None = None
    sl: float | None = None
    connection: float | None = None
    decay_slope: float | None = None

    def values(self):
        return [v for v in (self.matrix, self.shooting, self.sl) if v is not None]

    @property
    def discrepancy(self) -> float:
        """Largest pairwise relative difference among the available routes."""
        vals = self.values()
        worst = 0.0
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                den = max(abs(vals[i]), abs(vals[j]))
                if den > 0:
                    worst = max(worst, abs(vals[i] - vals[j]) / den)
        return worst

    @property
    def representative(self) -> complex:
        for v in (self.matrix, self.shooting, self.sl):
            if v is not None:
                return complex(v)
        raise ValueError("empty row")

    @property
    def complete(self) -> bool:
        return self.matrix is not None and self.shooting is not None and self.sl is not None


@dataclass
class CrossReport:
    """Rows of matched eigenvalues plus entries that found no partner.

    ``unmatched`` lists ``(route, value)`` for every value that sits in a row
    lacking at least one other route, so nothing is silently dropped.
    """

    epsilon: float
    rows: list
    unmatched: list

    @property
    def max_discrepancy(self) -> float:
        return max((r.discrepancy for r in self.rows), default=0.0)

    def max_abs_imag(self) -> float:
        return max((abs(complex(r.matrix).imag) for r in self.rows if r.matrix is not None),
                   default=0.0)

    def records(self):
        """Flat records suitable for CSV/JSON output."""
        out = []
        for k, r in enumerate(self.rows, start=1):
            m = None if r.matrix is None else complex(r.matrix)
            out.append({
                "epsilon": self.epsilon,
                "index": k,
                "re_lambda_matrix": None if m is None else m.real,
                "im_lambda_matrix": None if m is None else m.imag,
                "lambda_shooting": r.shooting,
                "lambda_sl": r.sl,
                "connection_ratio": r.connection,
                "decay_slope": r.decay_slope,
                "discrepancy": r.discrepancy,
                "complete": r.complete,
            })
        return out


def _nearest(value, pool, used, tol):
    best, best_gap = None, math.inf
    for i, p in enumerate(pool):
        if i in used:
            continue
        gap = abs(complex(p) - complex(value)) / max(abs(complex(value)), 1e-300)
        if gap < best_gap:
            best, best_gap = i, gap
    return best if best_gap <= tol else None


def build_cross_report(epsilon, matrix_eigs, shooting_roots, sl_lambdas,
                       connection_values=(), tol=MATCH_TOL) -> CrossReport:
    """Match eigenvalues from the three routes by nearest neighbour.

    Parameters
    ----------
    epsilon : float
    matrix_eigs : sequence of complex or EigenPair
    shooting_roots, sl_lambdas : sequence of float
    connection_values : sequence of (lam, ratio) or dict
        ``|b|/|a|`` from the connection fit, keyed by the eigenvalue used.
    tol : float
        Relative matching tolerance.
    """
    mats, slopes = [], []
    for e in matrix_eigs:
        if hasattr(e, "lam"):
            mats.append(complex(e.lam))
            slopes.append(e.decay_slope)
        else:
            mats.append(complex(e))
            slopes.append(None)
    order = sorted(range(len(mats)), key=lambda i: (mats[i].real, mats[i].imag))
    shoot = sorted(float(x) for x in shooting_roots)
    sls = sorted(float(x) for x in sl_lambdas)
    conn = dict(connection_values) if not isinstance(connection_values, dict) else connection_values
    conn_keys = list(conn.keys())

    rows = []
    used_s, used_l = set(), set()
    for i in order:
        row = CrossRow(matrix=mats[i], decay_slope=slopes[i])
        j = _nearest(mats[i], shoot, used_s, tol)
        if j is not None:
            used_s.add(j)
            row.shooting = shoot[j]
        j = _nearest(mats[i], sls, used_l, tol)
        if j is not None:
            used_l.add(j)
            row.sl = sls[j]
        rows.append(row)
    for j, s in enumerate(shoot):
        if j in used_s:
            continue
        row = CrossRow(shooting=s)
        k = _nearest(s, sls, used_l, tol)
        if k is not None:
            used_l.add(k)
            row.sl = sls[k]
        rows.append(row)
    for k, s in enumerate(sls):
        if k not in used_l:
            rows.append(CrossRow(sl=s))
    for row in rows:
        k = _nearest(row.representative, conn_keys, set(), tol)
        if k is not None:
            row.connection = float(conn[conn_keys[k]])
    rows.sort(key=lambda r: (r.matrix is None, r.representative.real, r.representative.imag))
    unmatched = []
    for row in rows:
        if row.complete:
            continue
        for name in ROUTES:
            val = getattr(row, name)
            if val is not None:
                unmatched.append((name, val))
    return CrossReport(float(epsilon), rows, unmatched)
