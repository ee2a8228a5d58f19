"""Large-index expansion of the decaying recurrence solution.

For index n the decaying solution behaves like
``(-1)**n * n**sigma * sum_j a_j n**-j`` with ``sigma = -1 - 1/eps``.
Dividing the recurrence by ``n**(sigma+2)`` and expanding in x = 1/n gives,
at order x**(k+1), ``-eps*k*a_k + r_k = 0`` where ``r_k`` depends only on
``a_0..a_{k-1}``; the recursion is therefore never singular.

Each ``a_j`` is a polynomial of degree ``j`` in lambda.  The polynomials are
built once per (eps, terms) in 40-digit arithmetic and cached.  The double
path evaluates them with numpy; :func:`tail_ratio_split` evaluates them in
extended precision and returns the ratio as an unevaluated sum ``hi + lo``
for the double-double recurrence, whose accuracy would otherwise be capped
by a double-precision seed.
"""
from functools import lru_cache

import mpmath
import numpy as np
from numpy.polynomial import polynomial as P

__all__ = ["tail_coefficients", "tail_ratio", "tail_ratio_split", "DEFAULT_TERMS"]

DEFAULT_TERMS = 12
_DPS = 40


def _binomial_series(e, h, length):
    # coefficients of (1 + h x)**e in powers of x
    out = [mpmath.mpf(1)]
    c = mpmath.mpf(1)
    for i in range(1, length):
        c = c * (e - i + 1) / i
        out.append(c * mpmath.mpf(h) ** i)
    return out


def _conv(a, b, length):
    out = [mpmath.mpf(0)] * length
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            if i + j < length:
                out[i + j] += x * y
    return out


@lru_cache(maxsize=64)
def _polys_mp(eps, terms):
    with mpmath.workdps(_DPS):
        e = mpmath.mpf(eps)
        sigma = -1 - 1 / e
        length = terms + 2
        h = e / 2
        # recurrence rows divided by n**(sigma+2), grouped by the shift of v;
        # the v_{n+1} group is p1 + lam * p1_lam
        p2 = [h, 3 * h, 2 * h]
        p1 = [mpmath.mpf(0), mpmath.mpf(1), mpmath.mpf(1)]
        p1_lam = [mpmath.mpf(0), mpmath.mpf(0), mpmath.mpf(-1)]
        p0 = [-h, -h]
        const, slope = [], []
        for j in range(terms):
            b2 = _binomial_series(sigma - j, 2, length)
            b1 = _binomial_series(sigma - j, 1, length)
            b0 = _binomial_series(sigma - j, 0, length)
            c0 = [x + y + z for x, y, z in zip(_conv(p2, b2, length), _conv(p1, b1, length),
                                               _conv(p0, b0, length))]
            const.append(c0)
            slope.append(_conv(p1_lam, b1, length))
        polys = [[mpmath.mpf(1)]]
        for k in range(1, terms + 1):
            acc = [mpmath.mpf(0)] * (k + 1)
            for j in range(k):
                idx = k + 1 - j
                c0, c1 = const[j][idx], slope[j][idx]
                for d, coef in enumerate(polys[j]):
                    acc[d] += coef * c0
                    acc[d + 1] += coef * c1
            polys.append([x / (e * k) for x in acc])
        return tuple(tuple(p) for p in polys), sigma


@lru_cache(maxsize=64)
def _polys_float(eps, terms):
    polys, sigma = _polys_mp(eps, terms)
    return tuple(np.array([float(c) for c in p]) for p in polys), float(sigma)


def tail_coefficients(eps, lam, terms=DEFAULT_TERMS):
    """Return ``(a, sigma)`` with ``a[0] = 1`` evaluated at ``lam``."""
    polys, sigma = _polys_float(float(eps), int(terms))
    a = np.array([P.polyval(lam, c) for c in polys], dtype=complex)
    return a, sigma


def tail_ratio(eps, lam, n, terms=DEFAULT_TERMS):
    """Asymptotic ratio ``v[n+1] / v[n]`` of the decaying solution."""
    a, sigma = tail_coefficients(eps, lam, terms)
    j = np.arange(a.size)
    s0 = np.sum(a * float(n) ** (-j))
    s1 = np.sum(a * float(n + 1) ** (-j))
    return complex(-((n + 1.0) / n) ** sigma * s1 / s0)


def tail_ratio_split(eps, lam, n, terms=DEFAULT_TERMS):
    """Same ratio as :func:`tail_ratio`, returned as ``(hi, lo)`` complex doubles."""
    polys, sigma = _polys_mp(float(eps), int(terms))
    with mpmath.workdps(_DPS):
        lam = mpmath.mpc(lam)
        x0 = mpmath.mpf(1) / n
        x1 = mpmath.mpf(1) / (n + 1)
        s0 = mpmath.mpc(0)
        s1 = mpmath.mpc(0)
        for j, p in enumerate(polys):
            aj = mpmath.polyval(p[::-1], lam)
            s0 += aj * x0**j
            s1 += aj * x1**j
        r = -mpmath.power(mpmath.mpf(n + 1) / n, sigma) * s1 / s0
        hi = complex(r)
        lo = complex(r - mpmath.mpc(hi))
    return hi, lo
