"""Frobenius solutions of the generating-function ODE and the connection test.

The generating function ``u(z) = sum_k v_k z**k`` of a coefficient sequence
solves

    (z**3 - z) u'' + (2 z**2 + (2/eps) z) u' - mu u = 0,   mu = 2 lam / eps,

a Heun equation with singular points 0, 1, -1 and infinity.  Exponents are
{0, 1} at 0 and {0, -1/eps} at 1.  Near 1 every solution is
``a u1 + b u2`` with ``u1`` regular and ``u2`` blowing up; ``lam`` is an
eigenvalue exactly when the exponent-1 solution at 0 has ``b = 0``.

Series about a center ``c`` use the local variable ``t = s (z - c)`` with
``s = +1`` at 0 and ``s = -1`` at 1 (so ``t = 1 - z`` is positive on
(0, 1)).  The coefficient recursion is generated from the shifted
polynomial coefficients of the ODE rather than written out by hand.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import brentq

from .exceptions import ConvergenceError, ResonantEpsilonError
from .operator import HeunParams, heun_parameters, integer_inverse, validate_epsilon

__all__ = [
    "FrobeniusSeries",
    "OverlapSample",
    "ConnectionFit",
    "ode_polynomials",
    "series_at_0",
    "series_at_1",
    "overlap_points",
    "sample_overlap",
    "connection_fit",
    "connection_at",
    "connection_roots",
    "heun_residual",
    "K_MAX",
]

K_MAX = 400
TERM_TOL = 1e-14
COND_LIMIT = 1e8


def ode_polynomials(params: HeunParams):
    """Coefficients ``(P2, P1, P0)`` of ``P2 u'' + P1 u' + P0 u = 0`` in z."""
    eps = params.epsilon
    p2 = Polynomial([0.0, -1.0, 0.0, 1.0])
    p1 = Polynomial([0.0, 2.0 / eps, 2.0])
    p0 = Polynomial([-params.mu])
    return p2, p1, p0


def _local_operator(params, center, sign):
    """Coefficient arrays (q, p, r) of the t-multiplied ODE about ``center``.

    With ``P2 = t q(t)`` the equation times ``t`` reads
    ``t**2 q u_tt + t p u_t + t P0 u = 0``; acting on ``t**x`` it produces
    ``sum_j L_j(x) t**(x+j)`` with ``L_j(x) = q_j x (x-1) + p_j x + r_j``.
    """
    p2, p1, p0 = ode_polynomials(params)
    shift = Polynomial([center, sign])
    P2 = p2(shift).coef.astype(complex)
    P1 = (sign * p1(shift)).coef.astype(complex)
    P0 = np.atleast_1d(p0(shift).coef).astype(complex)
    if abs(P2[0]) > 1e-14:
        raise ValueError(f"z = {center} is not a singular point of the equation")
    q = P2[1:]
    r = np.concatenate([[0.0], P0])
    width = max(q.size, P1.size, r.size)
    pad = lambda a: np.pad(a, (0, width - a.size))  # noqa: E731
    return pad(q), pad(P1), pad(r)


def _indicial_roots(q, p):
    # q0 x (x-1) + p0 x = 0
    return 0.0, 1.0 - (p[0] / q[0]).real


def _L(q, p, r, j, x):
    return q[j] * x * (x - 1.0) + p[j] * x + r[j]


def _dL(q, p, j, x):
    return q[j] * (2.0 * x - 1.0) + p[j]


def _frobenius(q, p, r, rho, K):
    c = np.zeros(K, dtype=complex)
    c[0] = 1.0
    width = q.size
    for m in range(1, K):
        acc = 0.0j
        for j in range(1, min(m, width - 1) + 1):
            acc += c[m - j] * _L(q, p, r, j, rho + m - j)
        den = _L(q, p, r, 0, rho + m)
        if den == 0:
            raise ZeroDivisionError(f"resonant Frobenius step at m = {m}")
        c[m] = -acc / den
    return c


def _frobenius_log(q, p, r, rho1, rho2, c1, K):
    """Second solution ``kappa u1 log t + t**rho2 sum d_k t**k`` for integer gap."""
    m0 = int(round(rho1 - rho2))
    width = q.size
    d = np.zeros(K, dtype=complex)
    d[0] = 1.0
    kappa = 0.0j
    for m in range(1, K):
        acc = 0.0j
        for j in range(1, min(m, width - 1) + 1):
            acc += d[m - j] * _L(q, p, r, j, rho2 + m - j)
        if m == m0:
            kappa = -acc / _dL(q, p, 0, rho1)
            d[m] = 0.0  # free constant; fixing it to zero fixes u2
            continue
        if m > m0:
            for i in range(0, m - m0 + 1):
                j = m - m0 - i
                if j < width:
                    acc += kappa * c1[i] * _dL(q, p, j, rho1 + i)
        d[m] = -acc / _L(q, p, r, 0, rho2 + m)
    return d, kappa


@dataclass(frozen=True)
class FrobeniusSeries:
    """Local solution ``t**exponent * sum c_k t**k (+ log_coeff * partner * log t)``.

    Attributes
    ----------
    center : float
        0 or 1.
    exponent : float
    coeffs : ndarray
        ``c_0 = 1``.
    radius : float
        Convergence radius in t (distance to the nearest other singular point).
    sign : int
        ``t = sign * (z - center)``.
    log_coeff : complex
        Nonzero only for the logarithmic second solution.
    partner : FrobeniusSeries or None
        Regular series multiplying the logarithm.
    """

    center: float
    exponent: float
    coeffs: np.ndarray = field(repr=False)
    radius: float = 1.0
    sign: int = 1
    log_coeff: complex = 0.0
    partner: "FrobeniusSeries | None" = field(default=None, repr=False)

    @property
    def K(self) -> int:
        return int(self.coeffs.size)

    def local(self, z):
        return self.sign * (np.asarray(z, dtype=complex) - self.center)

    def terms_needed(self, z, tol=TERM_TOL):
        """Smallest K whose last retained term is below ``tol`` relative to the sum."""
        t = abs(complex(self.local(z)))
        mags = np.abs(self.coeffs) * t ** np.arange(self.K)
        total = np.cumsum(self.coeffs * complex(self.local(z)) ** np.arange(self.K))
        for k in range(4, self.K):
            if mags[k] <= tol * max(abs(total[k]), 1e-300):
                # require a short run of small terms to skip accidental zeros
                if np.all(mags[k:k + 4] <= tol * max(abs(total[k]), 1e-300)):
                    return k + 1
        return None

    def _power_sum(self, t, deriv):
        k = np.arange(self.K)
        x = self.exponent + k
        c = self.coeffs
        if deriv == 0:
            w = c
        elif deriv == 1:
            w = c * x
        else:
            w = c * x * (x - 1.0)
        return np.sum(w[None, :] * t[:, None] ** (x[None, :] - deriv), axis=1)

    def evaluate(self, z, deriv=0):
        """Value or z-derivative (order 0, 1, 2) at points ``z``."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        t = self.local(z)
        val = self._power_sum(t, deriv)
        if self.partner is not None and self.log_coeff != 0:
            pv = self.partner._power_sum(t, 0)
            lg = np.log(t)
            if deriv == 0:
                val = val + self.log_coeff * pv * lg
            elif deriv == 1:
                p1 = self.partner._power_sum(t, 1)
                val = val + self.log_coeff * (p1 * lg + pv / t)
            else:
                p1 = self.partner._power_sum(t, 1)
                p2 = self.partner._power_sum(t, 2)
                val = val + self.log_coeff * (p2 * lg + 2 * p1 / t - pv / t**2)
        return val * self.sign**deriv

    def __call__(self, z):
        return self.evaluate(z, 0)


def series_at_0(params: HeunParams, K: int, branch=1) -> FrobeniusSeries:
    """Exponent-1 solution at the origin; ``coeffs[k]`` equals ``v_{k+1}/v_1``.

    Only ``branch=1`` is available: the exponent-0 solution may involve a
    logarithm and is never needed.
    """
    if branch != 1:
        raise ValueError("only the exponent-1 solution at z = 0 is supported")
    if K < 1:
        raise ValueError("K must be positive")
    q, p, r = _local_operator(params, 0.0, 1)
    return FrobeniusSeries(0.0, 1.0, _frobenius(q, p, r, 1.0, K), 1.0, 1)


def _exponent_kind(choice, eps):
    if isinstance(choice, str):
        if choice in ("regular", "0"):
            return "regular"
        if choice in ("singular", "-1/eps"):
            return "singular"
    elif choice == 0:
        return "regular"
    elif abs(choice + 1.0 / eps) < 1e-12:
        return "singular"
    raise ValueError("exponent_choice must be 0 or -1/epsilon ('regular' or 'singular')")


def series_at_1(params: HeunParams, exponent_choice, K: int,
                allow_resonant=False) -> FrobeniusSeries:
    """Solution about z = 1 with exponent 0 (``u1``) or -1/eps (``u2``).

    Parameters
    ----------
    params : HeunParams
    exponent_choice : 0, -1/eps, "regular" or "singular"
    K : int
    allow_resonant : bool
        When 1/eps is an integer the exponents differ by an integer and
        ``u2`` carries a ``log(1 - z)`` term; building it then requires this
        flag.  Otherwise integer 1/eps raises :class:`ResonantEpsilonError`.
    """
    eps = params.epsilon
    kind = _exponent_kind(exponent_choice, eps)
    k_int = integer_inverse(eps)
    if k_int is not None and not allow_resonant:
        raise ResonantEpsilonError(eps, k_int)
    if K < 1:
        raise ValueError("K must be positive")
    q, p, r = _local_operator(params, 1.0, -1)
    rho1, rho2 = _indicial_roots(q, p)
    if k_int is not None:
        rho2 = -float(k_int)
    c1 = _frobenius(q, p, r, rho1, K)
    u1 = FrobeniusSeries(1.0, rho1, c1, 1.0, -1)
    if kind == "regular":
        return u1
    if k_int is None:
        return FrobeniusSeries(1.0, rho2, _frobenius(q, p, r, rho2, K), 1.0, -1)
    d, kappa = _frobenius_log(q, p, r, rho1, rho2, c1, K)
    return FrobeniusSeries(1.0, rho2, d, 1.0, -1, complex(kappa), u1)


def heun_residual(params: HeunParams, series, z):
    """Relative ODE defect of ``series`` at points ``z``.

    Defect divided by the sum of magnitudes of the three terms.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p2, p1, p0 = ode_polynomials(params)
    a = p2(z) * series.evaluate(z, 2)
    b = p1(z) * series.evaluate(z, 1)
    c = p0(z) * series.evaluate(z, 0)
    return np.abs(a + b + c) / (np.abs(a) + np.abs(b) + np.abs(c))


def overlap_points(n=12, center=0.5, radius=0.25):
    """Points on a circle inside both unit discs about 0 and 1."""
    theta = 2 * np.pi * (np.arange(n) + 0.5) / n
    pts = center + radius * np.exp(1j * theta)
    margin = np.minimum(1 - np.abs(pts), 1 - np.abs(pts - 1))
    if np.any(margin < 0.2):
        raise ValueError("sample points must keep a margin of 0.2 from both unit circles")
    return pts


@dataclass(frozen=True)
class OverlapSample:
    """Values of ``u``, ``u1``, ``u2`` at shared sample points."""

    points: np.ndarray
    u: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    terms_used: int = 0


@dataclass(frozen=True)
class ConnectionFit:
    """Least-squares coefficients of ``u = a u1 + b u2``.

    ``cond`` is the condition number of the column-normalized design matrix;
    ``residual`` is the relative fit residual.
    """

    a: complex
    b: complex
    cond: float
    residual: float

    @property
    def ratio(self) -> float:
        """``|b| / |a|``."""
        return abs(self.b) / abs(self.a) if self.a != 0 else float("inf")


def connection_fit(u_values, u1_values=None, u2_values=None) -> ConnectionFit:
    """Fit ``u = a u1 + b u2`` over sample points.

    Accepts an :class:`OverlapSample` or three arrays.

    Raises
    ------
    ValueError
        Fewer than 8 points.
    ConvergenceError
        The design matrix condition number exceeds 1e8.
    """
    if isinstance(u_values, OverlapSample):
        u, u1, u2 = u_values.u, u_values.u1, u_values.u2
    else:
        u, u1, u2 = u_values, u1_values, u2_values
    u = np.asarray(u, dtype=complex)
    A = np.column_stack([np.asarray(u1, dtype=complex), np.asarray(u2, dtype=complex)])
    if u.size < 8:
        raise ValueError("connection_fit needs at least 8 sample points")
    norms = np.linalg.norm(A, axis=0)
    if np.any(norms == 0):
        raise ConvergenceError("a basis column vanishes on the sample")
    As = A / norms
    cond = float(np.linalg.cond(As))
    if cond > COND_LIMIT:
        raise ConvergenceError(f"sample design matrix is ill-conditioned (cond = {cond:.3g})")
    coef, *_ = np.linalg.lstsq(As, u, rcond=None)
    coef = coef / norms
    res = float(np.linalg.norm(A @ coef - u) / max(np.linalg.norm(u), 1e-300))
    return ConnectionFit(complex(coef[0]), complex(coef[1]), cond, res)


def _adaptive_K(series_list, pts, K_max):
    need = 4
    for s in series_list:
        for z in pts:
            k = s.terms_needed(z)
            if k is None:
                return K_max, False
            need = max(need, k)
    return need, True


def sample_overlap(epsilon, lam, points=None, K=None, allow_resonant=False) -> OverlapSample:
    """Evaluate the three local solutions at the overlap sample points.

    ``K`` fixes the number of series terms; by default it is chosen so the
    last retained term is below 1e-14 of the partial sum at every point
    (at most ``K_MAX``).
    """
    params = heun_parameters(epsilon, lam)
    pts = overlap_points() if points is None else np.asarray(points, dtype=complex)
    K_full = K_MAX if K is None else int(K)
    s0 = series_at_0(params, K_full)
    s1 = series_at_1(params, "regular", K_full, allow_resonant)
    s2 = series_at_1(params, "singular", K_full, allow_resonant)
    if K is None:
        K_use, ok = _adaptive_K([s0, s1, s2], pts, K_MAX)
        if not ok:
            raise ConvergenceError(f"series did not converge within K = {K_MAX} terms")
        s0 = FrobeniusSeries(0.0, 1.0, s0.coeffs[:K_use], 1.0, 1)
        s1 = FrobeniusSeries(1.0, s1.exponent, s1.coeffs[:K_use], 1.0, -1)
        s2 = FrobeniusSeries(1.0, s2.exponent, s2.coeffs[:K_use], 1.0, -1, s2.log_coeff,
                             s1 if s2.partner is not None else None)
    else:
        K_use = K_full
    return OverlapSample(pts, s0(pts), s1(pts), s2(pts), K_use)


def connection_at(epsilon, lam, points=None, K=None, allow_resonant=False) -> ConnectionFit:
    """Connection coefficients of the exponent-1 solution at 0 for a given ``lam``."""
    return connection_fit(sample_overlap(epsilon, lam, points, K, allow_resonant))


def _signed_b(epsilon, lam, allow_resonant):
    fit = connection_at(epsilon, lam, allow_resonant=allow_resonant)
    # for real lam both coefficients are real; scaling by hypot keeps the
    # function bounded without the poles of b/a where a vanishes
    return fit.b.real / np.hypot(abs(fit.a), abs(fit.b))


def connection_roots(epsilon, interval, seeds=None, allow_resonant=False, xtol=1e-13):
    """Real ``lam`` in ``interval`` where the connection coefficient ``b`` vanishes."""
    eps = validate_epsilon(epsilon)
    lo, hi = map(float, interval)
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    if seeds is None:
        seeds = max(100, int(20 * (hi - lo)))
    grid = np.linspace(lo, hi, int(seeds))
    vals = np.array([_signed_b(eps, x, allow_resonant) for x in grid])
    roots = []
    for i in range(grid.size - 1):
        if vals[i] == 0.0:
            roots.append(grid[i])
        elif np.sign(vals[i]) != np.sign(vals[i + 1]) and vals[i + 1] != 0.0:
            roots.append(brentq(lambda x: _signed_b(eps, x, allow_resonant), grid[i],
                                grid[i + 1], xtol=xtol * max(1.0, abs(grid[i]))))
    if vals[-1] == 0.0:
        roots.append(grid[-1])
    return sorted(float(r) for r in roots)
