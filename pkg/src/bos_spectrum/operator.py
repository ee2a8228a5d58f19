"""Model parameter, truncated operator and derived coefficient data.

The operator acts on sequences ``v_1, v_2, ...``; row ``n`` reads

    (eps/2) n (n-1) v_{n-1} + n v_n - (eps/2) n (n+1) v_{n+1}.

Rows are numbered from 1 in every public function and docstring.  Arrays
are 0-based internally: ``diag[k]`` holds row ``k + 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ._asymptotics import tail_ratio
from .exceptions import ResonantEpsilonError

__all__ = [
    "INTEGER_TOL",
    "validate_epsilon",
    "integer_inverse",
    "entry_sub",
    "entry_sup",
    "TridiagonalOperator",
    "build_truncated",
    "HeunParams",
    "heun_parameters",
    "SLCoefficients",
    "sl_coefficients",
    "reflect_minus",
    "ReflectionComparison",
    "compare_reflection",
]

INTEGER_TOL = 1e-9
CLOSURES = ("none", "asymptotic", "asymptotic-linear")


def integer_inverse(epsilon, tol=INTEGER_TOL):
    """Return the integer ``k`` with ``|1/epsilon - k| < tol``, else None."""
    inv = 1.0 / epsilon
    k = round(inv)
    return int(k) if abs(inv - k) < tol else None


def validate_epsilon(epsilon, theorem=False, tol=INTEGER_TOL):
    """Check ``0 < epsilon < 2`` and, when ``theorem``, that 1/epsilon is not an integer.

    Returns ``epsilon`` as a float.

    Raises
    ------
    ValueError
        epsilon outside (0, 2) or not finite.
    ResonantEpsilonError
        ``theorem`` is set and 1/epsilon is within ``tol`` of an integer.
    """
    try:
        eps = float(epsilon)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"epsilon must be a real number in (0, 2), got {epsilon!r}") from exc
    if not (0.0 < eps < 2.0):
        raise ValueError(f"epsilon must lie in the open interval (0, 2), got {epsilon!r}")
    if theorem:
        k = integer_inverse(eps, tol)
        if k is not None:
            raise ResonantEpsilonError(eps, k)
    return eps


def entry_sub(epsilon, n):
    """Coefficient of ``v_{n-1}`` in row ``n``: ``(eps/2) n (n-1)``."""
    if n < 1:
        raise ValueError("row index n must be >= 1")
    return 0.5 * epsilon * n * (n - 1)


def entry_sup(epsilon, n):
    """Coefficient of ``v_{n+1}`` in row ``n``: ``-(eps/2) n (n+1)``."""
    if n < 1:
        raise ValueError("row index n must be >= 1")
    return -0.5 * epsilon * n * (n + 1)


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TridiagonalOperator:
    """Banded N x N matrix.

    ``sub[k]`` is entry (row k+2, column k+1), ``diag[k]`` is entry
    (k+1, k+1), ``sup[k]`` is entry (k+1, k+2), all in 1-based row numbers.

    Attributes
    ----------
    sub, diag, sup : ndarray
    epsilon : float
    closure : str
        How the coupling past the last row was treated when building.
    """

    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray
    epsilon: float
    closure: str = "none"

    def __post_init__(self):
        object.__setattr__(self, "sub", _frozen(self.sub))
        object.__setattr__(self, "diag", _frozen(self.diag))
        object.__setattr__(self, "sup", _frozen(self.sup))
        n = self.diag.size
        if n < 1:
            raise ValueError("operator size must be >= 1")
        if self.sub.size != n - 1 or self.sup.size != n - 1:
            raise ValueError("off-diagonals must have length N - 1")
        if not (np.all(np.isfinite(self.sub)) and np.all(np.isfinite(self.diag))
                and np.all(np.isfinite(self.sup))):
            raise ValueError("operator entries must be finite")

    @property
    def size(self) -> int:
        return int(self.diag.size)

    def to_dense(self) -> np.ndarray:
        n = self.size
        t = np.diag(np.asarray(self.diag, dtype=float))
        if n > 1:
            k = np.arange(n - 1)
            t[k + 1, k] = self.sub
            t[k, k + 1] = self.sup
        return t

    def matvec(self, v):
        v = np.asarray(v)
        out = self.diag * v
        if self.size > 1:
            out[1:] += self.sub * v[:-1]
            out[:-1] += self.sup * v[1:]
        return out

    def row_norm(self) -> float:
        """Infinity norm (largest absolute row sum)."""
        s = np.abs(self.diag).astype(float)
        s[1:] += np.abs(self.sub)
        s[:-1] += np.abs(self.sup)
        return float(s.max())


def _closure_terms(eps, n, closure):
    """Diagonal shift and row scale for the last row.

    The missing term ``sup_N v_{N+1}`` is replaced by ``sup_N * r(lam) * v_N``
    with ``r`` the ratio of the decaying solution at large index.  The
    "asymptotic" closure keeps the lam-independent leading part of ``r``;
    "asymptotic-linear" also folds its first-order lam dependence into a
    rescaling of the last row so the problem stays linear.
    """
    sup_n = -0.5 * eps * n * (n + 1)
    if closure == "asymptotic":
        # leading ratio (1/eps - n)/(n + 1)
        return sup_n * (1.0 / eps - n) / (n + 1), 1.0
    r0 = tail_ratio(eps, 0.0, n).real
    step = 1e-3 * n
    dr = (tail_ratio(eps, step, n) - tail_ratio(eps, -step, n)).real / (2 * step)
    return sup_n * r0, 1.0 - sup_n * dr


def build_truncated(epsilon, N, closure="none") -> TridiagonalOperator:
    """Leading N x N section of the operator (rows 1..N).

    Parameters
    ----------
    epsilon : float
        In (0, 2).
    N : int
        Number of rows, >= 1.
    closure : {"none", "asymptotic", "asymptotic-linear"}
        ``"none"`` is the plain principal section.  The other options modify
        only row N to mimic the decaying tail beyond the truncation, which
        speeds up convergence of the low eigenvalues in N considerably.
    """
    eps = validate_epsilon(epsilon)
    if isinstance(N, bool) or int(N) != N or N < 1:
        raise ValueError(f"truncation size N must be a positive integer, got {N!r}")
    if closure not in CLOSURES:
        raise ValueError(f"closure must be one of {CLOSURES}, got {closure!r}")
    N = int(N)
    n = np.arange(1, N + 1, dtype=float)
    diag = n.copy()
    sub = 0.5 * eps * n[1:] * (n[1:] - 1.0)
    sup = -0.5 * eps * n[:-1] * (n[:-1] + 1.0)
    if closure != "none" and N > 1:
        shift, scale = _closure_terms(eps, N, closure)
        diag[-1] = (diag[-1] + shift) / scale
        sub[-1] /= scale
    return TridiagonalOperator(sub, diag, sup, eps, closure)


@dataclass(frozen=True)
class HeunParams:
    """Constants of the Heun equation satisfied by the generating function."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    eps_h: float
    a: float
    mu: complex
    epsilon: float
    lam: complex = 0.0

    def fuchs_defect(self) -> float:
        """``gamma + delta + eps_h - (alpha + beta + 1)``; zero for a valid set."""
        return self.gamma + self.delta + self.eps_h - (self.alpha + self.beta + 1.0)


def heun_parameters(epsilon, lam) -> HeunParams:
    """Heun constants for a given eps and trial eigenvalue ``lam``."""
    eps = validate_epsilon(epsilon)
    inv = 1.0 / eps
    mu = 2.0 * lam / eps
    delta = 1.0 + inv
    # written as 2 - delta so the Fuchs relation holds to a single rounding
    eps_h = 2.0 - delta
    return HeunParams(1.0, 0.0, 0.0, delta, eps_h, -1.0, mu, eps, lam)


@dataclass(frozen=True)
class SLCoefficients:
    """Evaluators for the self-adjoint form ``-(p u')' + q u = mu w u`` on [0, 1].

    ``zw`` evaluates ``z * w(z)``, which stays finite at the origin.
    """

    epsilon: float
    p: Callable = field(repr=False)
    q: Callable = field(repr=False)
    w: Callable = field(repr=False)
    zw: Callable = field(repr=False)


def _pow(base, s):
    # real branch on (0, 1]; base**s via exp(s log base)
    with np.errstate(divide="ignore"):
        return np.exp(s * np.log(base))


def sl_coefficients(epsilon) -> SLCoefficients:
    """Coefficient functions of the self-adjoint form for a given eps."""
    eps = validate_epsilon(epsilon)
    s = 1.0 / eps

    def _z(z):
        z = np.asarray(z, dtype=float)
        if np.any((z < 0.0) | (z > 1.0)):
            raise ValueError("coefficients are defined on [0, 1]")
        return z

    def p(z):
        z = _z(z)
        return _pow(1.0 - z, 1.0 + s) * _pow(1.0 + z, 1.0 - s)

    def q(z):
        return np.zeros_like(_z(z))

    def zw(z):
        z = _z(z)
        return _pow(1.0 - z, s) * _pow(1.0 + z, -s)

    def w(z):
        z = _z(z)
        if np.any(z == 0.0):
            raise ZeroDivisionError("w has a simple pole at z = 0")
        return zw(z) / z

    return SLCoefficients(eps, p, q, w, zw)


def reflect_minus(T: TridiagonalOperator) -> TridiagonalOperator:
    """Section of the negative-index block, re-indexed to rows 1..N.

    Rows ``-1..-N`` are built from the row formula at negative ``n`` and then
    listed in the order ``-1, -2, ..., -N``.  The result equals ``-T`` for a
    plain section; no particular equivalence is assumed in building it.
    """
    eps = T.epsilon
    N = T.size
    m = -np.arange(1, N + 1, dtype=float)  # row labels -1..-N
    diag = m.copy()
    # row m couples to v_{m-1} (next row in the reversed order) with
    # (eps/2) m (m-1) and to v_{m+1} (previous row) with -(eps/2) m (m+1)
    sup = 0.5 * eps * m[:-1] * (m[:-1] - 1.0)
    sub = -0.5 * eps * m[1:] * (m[1:] + 1.0)
    return TridiagonalOperator(sub, diag, sup, eps, "none")


@dataclass(frozen=True)
class ReflectionComparison:
    """Distances between spec(reflect_minus(T)) and +/- spec(T).

    Each distance is the largest nearest-neighbour gap, relative to
    ``1 + |lambda|``.
    """

    same_sign: float
    opposite_sign: float


def _set_distance(a, b):
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    d1 = np.abs(a[:, None] - b[None, :]).min(axis=1) / (1 + np.abs(a))
    d2 = np.abs(b[:, None] - a[None, :]).min(axis=1) / (1 + np.abs(b))
    return float(max(d1.max(), d2.max()))


def compare_reflection(T: TridiagonalOperator) -> ReflectionComparison:
    """Compare spec(reflect_minus(T)) with spec(T) and with -spec(T)."""
    lam_p = np.linalg.eigvals(T.to_dense())
    lam_m = np.linalg.eigvals(reflect_minus(T).to_dense())
    return ReflectionComparison(_set_distance(lam_m, lam_p), _set_distance(lam_m, -lam_p))
