"""Three-term recurrence for eigenvector coefficients and shooting on it.

An eigenvector ``v_1, v_2, ...`` of the operator satisfies, for n >= 2,

    (eps/2) n (n+1) v_{n+1} + (lam - n) v_n - (eps/2) n (n-1) v_{n-1} = 0,

together with the first-row condition ``eps v_2 = (1 - lam) v_1``.  Lists and
arrays here store ``v_n`` at position ``n - 1``.

The eigenvector is the decaying (minimal) solution, ~ n**(-1 - 1/eps); the
other solution grows like n**(1/eps - 1).  The minimal solution is computed
by running the recurrence downward from a large index M seeded with the
asymptotic ratio of the decaying solution.  An eigenvalue is a zero of the
first-row condition applied to that solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import _backend
from ._asymptotics import tail_ratio, tail_ratio_split
from .analysis import powerlaw_tail
from .exceptions import SingularNormalizationError
from .operator import validate_epsilon

__all__ = [
    "CoefficientSequence",
    "forward_run",
    "backward_minimal",
    "start_index",
    "shooting_residual",
    "shooting_ratio",
    "find_real_roots",
    "ScanResult",
    "complex_scan",
    "GeneratingValue",
    "generating_eval",
    "ode_residual",
    "row_residuals",
]

SELF_CONSISTENCY = 1e-10


@dataclass(frozen=True)
class CoefficientSequence:
    """A finite stretch ``v_1..v_M`` of a recurrence solution.

    Attributes
    ----------
    epsilon : float
    lam : complex
    v : ndarray
        ``v[k]`` holds ``v_{k+1}``.
    accurate : bool
        False when a backward run failed its doubling self-consistency test
        or a forward run stopped early on overflow.
    start : int or None
        Start index of a backward run.
    """

    epsilon: float
    lam: complex
    v: np.ndarray
    accurate: bool = True
    start: int | None = None

    def __len__(self):
        return int(self.v.size)


def forward_run(epsilon, lam, M) -> CoefficientSequence:
    """Iterate upward from ``v_1 = 1``, ``v_2 = (1 - lam)/eps``.

    Only trustworthy for small n: the growing solution takes over.  If the
    values overflow, the run stops at the last finite index and the result
    is flagged as not accurate.
    """
    eps = validate_epsilon(epsilon)
    if M < 2:
        raise ValueError("M must be >= 2")
    lam = complex(lam)
    h = 0.5 * eps
    v = np.empty(M, dtype=complex)
    v[0] = 1.0
    v[1] = (1.0 - lam) / eps
    last = M
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, M - 1):
            # row n+1 solved for v_{n+2}
            nxt = (h * n * (n + 1) * v[n - 1] + (n + 1 - lam) * v[n]) / (h * (n + 1) * (n + 2))
            if not (math.isfinite(nxt.real) and math.isfinite(nxt.imag)):
                last = n + 1
                break
            v[n + 1] = nxt
    return CoefficientSequence(eps, lam, v[:last].copy(), last == M, None)


def start_index(n_out, lam=0.0):
    """Default start index for the downward run."""
    return max(2 * n_out, 400, int(20 * abs(lam))) + 50


def _seed(eps, lam, M, seed, extended):
    # v_M = (-1)**M follows the sign pattern of the decaying solution, so the
    # overall sign of the result does not flip with the parity of M
    sign = -1.0 if M % 2 else 1.0
    if seed == "asymptotic":
        if extended:
            hi, lo = tail_ratio_split(eps, lam, M)
            return sign + 0j, sign * hi, sign * lo
        return sign + 0j, sign * tail_ratio(eps, lam, M), 0j
    if seed == "zero":
        return sign + 0j, 0j, 0j
    raise ValueError(f"seed must be 'asymptotic' or 'zero', got {seed!r}")


def _raw_backward(eps, lam, M, n_out, seed, extended):
    v_m, v_m1, v_m1_lo = _seed(eps, lam, M, seed, extended)
    v, _ = _backend.backward_recurrence(eps, complex(lam), M, v_m, v_m1, n_out, extended,
                                        v_m1_lo)
    return v


def _rel_change(a, b):
    scale = max(np.max(np.abs(a)), np.max(np.abs(b)))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else 0.0


def backward_minimal(epsilon, lam, M=None, N_out=10, seed="asymptotic", extended=False,
                     tol=SELF_CONSISTENCY, max_doublings=4) -> CoefficientSequence:
    """Decaying solution ``v_1..v_{N_out}`` normalized to ``v_1 = 1``.

    Parameters
    ----------
    epsilon : float
    lam : complex
    M : int, optional
        Start index, at least ``N_out + 50``; defaults to :func:`start_index`.
    N_out : int
    seed : {"asymptotic", "zero"}
        ``"asymptotic"`` starts from the large-index ratio of the decaying
        solution.  ``"zero"`` is the classical Miller start ``v_{M+1} = 0``,
        whose error only decays like ``(n/M)**(2/eps)``.
    extended : bool
        Double-double arithmetic for the downward run.
    tol : float
        Required relative agreement between start indices M and 2M.
    max_doublings : int

    Raises
    ------
    SingularNormalizationError
        ``v_1`` is numerically zero, so ``lam`` is close to a value where the
        decaying solution vanishes at the first index.
    """
    eps = validate_epsilon(epsilon)
    lam = complex(lam)
    if M is None:
        M = start_index(N_out, lam)
    if M < N_out + 50:
        raise ValueError("start index M must be at least N_out + 50")
    v = _raw_backward(eps, lam, M, N_out, seed, extended)
    accurate = False
    for _ in range(max_doublings):
        w = _raw_backward(eps, lam, 2 * M, N_out, seed, extended)
        # compare shapes, not scale: normalize both by their largest entry
        ia = int(np.argmax(np.abs(w)))
        change = _rel_change(v / v[ia] if v[ia] != 0 else v, w / w[ia])
        v, M = w, 2 * M
        if change <= tol:
            accurate = True
            break
    big = np.max(np.abs(v))
    if big == 0 or abs(v[0]) <= 1e-14 * big:
        raise SingularNormalizationError(
            f"v_1 is numerically zero at lam={lam!r}; the decaying solution cannot be "
            "normalized by its first entry")
    return CoefficientSequence(eps, lam, v / v[0], accurate, M)


def _first_two(eps, lam, M, extended, seed="asymptotic"):
    if M is None:
        M = start_index(2, lam)
    v = _raw_backward(eps, lam, M, 2, seed, extended)
    return v[0], v[1]


def shooting_residual(epsilon, lam, M=None, extended=False, seed="asymptotic") -> complex:
    """First-row defect of the decaying solution, scaled to be O(1).

    ``F(lam) = (eps v_2 - (1 - lam) v_1) / max(|v_1|, |v_2|)``.  F is
    continuous in lam and vanishes exactly at eigenvalues; on the real axis
    it is real, so sign changes bracket eigenvalues.
    """
    eps = validate_epsilon(epsilon)
    lam = complex(lam)
    v1, v2 = _first_two(eps, lam, M, extended, seed)
    scale = max(abs(v1), abs(v2))
    return complex((eps * v2 - (1.0 - lam) * v1) / scale)


def shooting_ratio(epsilon, lam, M=None, extended=False) -> complex:
    """Analytic form ``G(lam) = eps v_2 / v_1 - (1 - lam)``.

    Meromorphic in lam with the same zeros as :func:`shooting_residual`;
    poles sit where the decaying solution has ``v_1 = 0``.
    """
    eps = validate_epsilon(epsilon)
    lam = complex(lam)
    v1, v2 = _first_two(eps, lam, M, extended)
    return complex(eps * v2 / v1 - (1.0 - lam))


def find_real_roots(epsilon, interval, seeds=None, extended=True, xtol=1e-14):
    """Real eigenvalues in ``[lo, hi]`` from sign changes of the shooting residual.

    Parameters
    ----------
    epsilon : float
    interval : (float, float)
    seeds : int, optional
        Number of grid points used to bracket sign changes.  Defaults to
        ``max(200, 40 * (hi - lo))``.
    extended : bool
        Refine with double-double residuals.
    xtol : float
        Relative bracket width at which refinement stops.

    Returns
    -------
    list of float
        Sorted, with roots closer than 1e-10 (relative) merged.
    """
    eps = validate_epsilon(epsilon)
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    if seeds is None:
        seeds = max(200, int(40 * (hi - lo)))
    seeds = max(int(seeds), 2)
    grid = np.linspace(lo, hi, seeds)
    vals = np.array([shooting_residual(eps, x).real for x in grid])

    def f(x):
        return shooting_residual(eps, x, extended=extended).real

    roots = []
    for i in range(seeds - 1):
        a, b = grid[i], grid[i + 1]
        fa, fb = vals[i], vals[i + 1]
        if fa == 0.0:
            roots.append(a)
            continue
        if np.sign(fa) == np.sign(fb):
            continue
        if fb == 0.0:
            continue  # picked up as the next left endpoint
        # re-evaluate the ends in the refinement precision; the sign is robust
        fa_r, fb_r = f(a), f(b)
        if np.sign(fa_r) == np.sign(fb_r):
            continue
        roots.append(brentq(f, a, b, xtol=xtol * max(1.0, abs(a)), rtol=4 * np.finfo(float).eps,
                            maxiter=200))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    out = []
    for r in sorted(roots):
        if not out or abs(r - out[-1]) > 1e-10 * (1.0 + abs(r)):
            out.append(float(r))
    return out


@dataclass(frozen=True)
class ScanResult:
    """Outcome of a Newton scan over a rectangle of seeds.

    Attributes
    ----------
    roots : ndarray of complex
        Distinct converged roots sorted by real then imaginary part.
    hits : ndarray of int
        Number of seeds that converged to each root.
    n_seeds, n_failed : int
        Seeds tried, and seeds dropped for not converging.
    n_outside : int
        Seeds whose Newton limit lies outside the rectangle; such limits
        are not reported.
    """

    roots: np.ndarray
    hits: np.ndarray
    n_seeds: int
    n_failed: int
    n_outside: int = 0

    @property
    def max_abs_imag(self) -> float:
        return float(np.max(np.abs(self.roots.imag))) if self.roots.size else 0.0


def _defect_scaled(eps, lam, M):
    # first-row defect of the unnormalized downward run; for a fixed start
    # index this is an entire function of lam, returned as (mantissa, exponent)
    v_m, v_m1, lo = _seed(eps, lam, M, "asymptotic", False)
    v, e = _backend.backward_recurrence(eps, complex(lam), M, v_m, v_m1, 2, False, lo)
    return eps * v[1] - (1.0 - lam) * v[0], e


def _newton(eps, lam0, M, gate, max_iter, rel_step):
    lam = complex(lam0)
    for _ in range(max_iter):
        h = rel_step * (1.0 + abs(lam))
        f, e = _defect_scaled(eps, lam, M)
        if f == 0:
            break
        fp, ep = _defect_scaled(eps, lam + h, M)
        fm, em = _defect_scaled(eps, lam - h, M)
        df = (fp * 2.0 ** (ep - e) - fm * 2.0 ** (em - e)) / (2 * h)
        if not (np.isfinite(f) and np.isfinite(df)) or df == 0:
            return None
        step = f / df
        lam = lam - step
        if not np.isfinite(lam) or abs(lam) > 1e6:
            return None
        if abs(step) <= 1e-13 * (1.0 + abs(lam)):
            break
    if abs(shooting_residual(eps, lam)) <= gate:
        return lam
    return None


def complex_scan(epsilon, rect, grid=(40, 20), gate=1e-11, max_iter=50, rel_step=1e-6,
                 cluster_tol=1e-8) -> ScanResult:
    """Newton search for zeros of the shooting residual from a grid of seeds.

    Newton runs on the unnormalized first-row defect with one start index for
    the whole rectangle, which is entire in lam; the normalized ratio
    :func:`shooting_ratio` has poles between eigenvalues that steer most
    seeds to the lowest root.  A limit is accepted when the normalized
    residual :func:`shooting_residual` there is at most ``gate``.

    Parameters
    ----------
    epsilon : float
    rect : (re_lo, re_hi, im_lo, im_hi)
    grid : (int, int)
        Seeds along the real and imaginary directions.
    gate : float
        A seed counts as converged when ``|F| <= gate`` at its limit.
    max_iter : int
    rel_step : float
        Central-difference step relative to ``1 + |lam|``.
    cluster_tol : float
        Roots closer than ``cluster_tol * (1 + |lam|)`` are merged.
    """
    eps = validate_epsilon(epsilon)
    re_lo, re_hi, im_lo, im_hi = map(float, rect)
    if not (re_lo < re_hi and im_lo < im_hi):
        raise ValueError("rectangle must have re_lo < re_hi and im_lo < im_hi")
    nx, ny = int(grid[0]), int(grid[1])
    xs = np.linspace(re_lo, re_hi, nx)
    ys = np.linspace(im_lo, im_hi, ny)
    corner = max(abs(complex(a, b)) for a in (re_lo, re_hi) for b in (im_lo, im_hi))
    M = start_index(2, corner)
    pad_re = 1e-9 * (1.0 + max(abs(re_lo), abs(re_hi)))
    pad_im = 1e-9 * (1.0 + max(abs(im_lo), abs(im_hi)))
    found = []
    failed = outside = 0
    with np.errstate(all="ignore"):
        for x in xs:
            for y in ys:
                r = _newton(eps, complex(x, y), M, gate, max_iter, rel_step)
                if r is None:
                    failed += 1
                elif not (re_lo - pad_re <= r.real <= re_hi + pad_re
                          and im_lo - pad_im <= r.imag <= im_hi + pad_im):
                    outside += 1
                else:
                    found.append(r)
    roots, hits = [], []
    for r in sorted(found, key=lambda z: (z.real, z.imag)):
        for i, s in enumerate(roots):
            if abs(r - s) <= cluster_tol * (1.0 + abs(s)):
                hits[i] += 1
                break
        else:
            roots.append(r)
            hits.append(1)
    order = sorted(range(len(roots)), key=lambda i: (roots[i].real, roots[i].imag))
    return ScanResult(np.array([roots[i] for i in order], dtype=complex),
                      np.array([hits[i] for i in order], dtype=int), nx * ny, failed, outside)


@dataclass(frozen=True)
class GeneratingValue:
    """``u(z) = sum v_k z**k`` with bounds.

    ``tail_bound`` bounds the omitted terms for ``|z| <= 1`` using a power-law
    fit of the computed tail; ``abs_sum`` is ``sum |v_k| |z|**k``.
    """

    value: complex
    tail_bound: float
    abs_sum: float


def generating_eval(v, z) -> GeneratingValue:
    """Evaluate the generating function of a coefficient sequence at ``z``."""
    coeffs = np.asarray(v.v if isinstance(v, CoefficientSequence) else v, dtype=complex)
    z = complex(z)
    if abs(z) > 1.0 + 1e-15:
        raise ValueError("generating_eval requires |z| <= 1")
    k = np.arange(1, coeffs.size + 1)
    terms = coeffs * z**k
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    abs_sum = math.fsum(np.abs(terms))
    if abs(z) == 0.0:
        tail = 0.0
    else:
        tail = powerlaw_tail(np.abs(coeffs)) * 1.0
    return GeneratingValue(value, float(tail), float(abs_sum))


def row_residuals(v, epsilon=None, lam=None):
    """Relative defect of each recurrence row.

    Entry 0 is the first-row condition; entry ``n - 1`` (n >= 2) is row n,
    which needs ``v_{n+1}``, so the last index is ``len(v) - 1``.  Each defect
    is divided by the sum of the magnitudes of its terms.
    """
    if isinstance(v, CoefficientSequence):
        epsilon = v.epsilon if epsilon is None else epsilon
        lam = v.lam if lam is None else lam
        v = v.v
    v = np.asarray(v, dtype=complex)
    eps = float(epsilon)
    lam = complex(lam)
    h = 0.5 * eps
    m = v.size
    out = np.zeros(max(m - 1, 0))
    if m < 2:
        return out
    t1 = eps * v[1]
    t2 = (1.0 - lam) * v[0]
    den = abs(t1) + abs(t2)
    out[0] = abs(t1 - t2) / den if den > 0 else 0.0
    if m >= 3:
        n = np.arange(2, m, dtype=float)
        a = h * n * (n + 1) * v[2:]
        b = (lam - n) * v[1:-1]
        c = h * n * (n - 1) * v[:-2]
        den = np.abs(a) + np.abs(b) + np.abs(c)
        num = np.abs(a + b - c)
        with np.errstate(invalid="ignore", divide="ignore"):
            out[1:] = np.where(den > 0, num / den, 0.0)
    return out


def ode_residual(v, epsilon=None, lam=None, upto=None) -> float:
    """Largest relative row defect over the first-row condition and rows 2.. .

    A zero residual certifies that the generating function of ``v`` solves the
    associated second-order ODE term by term.

    Parameters
    ----------
    v : CoefficientSequence or array
    epsilon, lam : optional
        Required when ``v`` is a plain array.
    upto : int, optional
        Last row to include; defaults to ``len(v) - 1`` (every row whose
        three entries are available).
    """
    r = row_residuals(v, epsilon, lam)
    if upto is not None:
        r = r[:upto]
    return float(r.max()) if r.size else 0.0
