"""Eigenvalues and eigenvectors of truncated tridiagonal operators.

Eigenvalues come from a Francis double-shift QR sweep on the balanced
matrix (compiled when available).  Eigenvectors come from two steps of
shifted inverse iteration on the unbalanced band, with Gram-Schmidt against
already accepted vectors of nearby eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from . import _backend
from .analysis import decay_slope
from .exceptions import ConvergenceError, FitError
from .operator import TridiagonalOperator, build_truncated, validate_epsilon

__all__ = [
    "EigenPair",
    "SpectrumResult",
    "BalancedOperator",
    "MatrixSpectrum",
    "balance",
    "eigenvalues",
    "inverse_iteration",
    "eigen_all",
    "filter_stable",
    "matrix_spectrum",
]

DEFAULT_N = 1000
DEFAULT_TOL = 1e-8
DEFAULT_CLOSURE = "asymptotic-linear"


@dataclass(frozen=True)
class EigenPair:
    """One eigenvalue with optional unit-norm eigenvector and diagnostics."""

    lam: complex
    vector: np.ndarray | None = field(default=None, repr=False)
    residual: float = float("nan")
    stable: bool = False
    decay_slope: float | None = None


@dataclass(frozen=True)
class SpectrumResult:
    """All eigenpairs of one truncation, sorted by real then imaginary part."""

    epsilon: float
    N: int
    pairs: list

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.pairs], dtype=complex)


@dataclass(frozen=True)
class BalancedOperator:
    """Diagonally similar operator ``D^-1 T D`` together with ``D``."""

    operator: TridiagonalOperator
    scaling: np.ndarray

    def to_original(self, vec):
        """Map an eigenvector of the balanced matrix back to the original."""
        return self.scaling * np.asarray(vec)


def balance(T: TridiagonalOperator) -> BalancedOperator:
    """Equalize the magnitudes of each off-diagonal pair by a diagonal similarity.

    After balancing, entries (k+1, k) and (k, k+1) both have magnitude
    ``sqrt(|sub_k * sup_k|)`` and keep their original signs.
    """
    n = T.size
    log_ratio = np.zeros(max(n - 1, 0))
    ok = (T.sub != 0) & (T.sup != 0)
    log_ratio[ok] = 0.5 * (np.log(np.abs(T.sub[ok])) - np.log(np.abs(T.sup[ok])))
    logd = np.concatenate([[0.0], np.cumsum(log_ratio)])
    # center the exponents to keep D representable for long chains
    logd -= 0.5 * (logd.max() + logd.min())
    d = np.exp(logd)
    ratio = np.exp(np.diff(logd))
    sub = T.sub / ratio
    sup = T.sup * ratio
    # exact magnitudes where balancing applied, so the pairs match bitwise
    mag = np.sqrt(np.abs(T.sub * T.sup))
    sub = np.where(ok, np.sign(T.sub) * mag, sub)
    sup = np.where(ok, np.sign(T.sup) * mag, sup)
    return BalancedOperator(TridiagonalOperator(sub, T.diag, sup, T.epsilon, T.closure), d)


def _sort_key(lams):
    lams = np.asarray(lams, dtype=complex)
    return np.lexsort((lams.imag, lams.real))


def eigenvalues(T: TridiagonalOperator, budget=None) -> np.ndarray:
    """All eigenvalues, sorted by real part then imaginary part.

    Parameters
    ----------
    T : TridiagonalOperator
    budget : int, optional
        Total number of QR sweeps allowed; defaults to ``30 * max(10, N)``.

    Raises
    ------
    ConvergenceError
        The QR iteration ran out of its budget; ``index`` is the 1-based row
        that failed to deflate.
    """
    b = balance(T).operator
    h = np.ascontiguousarray(b.to_dense())
    wr, wi, fail = _backend.hessenberg_eigvals(h, -1 if budget is None else int(budget))
    if fail >= 0:
        raise ConvergenceError("QR iteration did not converge", index=int(fail) + 1)
    lams = wr + 1j * wi
    return lams[_sort_key(lams)]


def _banded(T, shift):
    n = T.size
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = T.sup
    ab[1] = T.diag - shift
    ab[2, :-1] = T.sub
    return ab


def inverse_iteration(T: TridiagonalOperator, lam, against=(), steps=2):
    """Unit eigenvector for ``lam`` by shifted inverse iteration.

    Parameters
    ----------
    T : TridiagonalOperator
    lam : complex
    against : sequence of ndarray
        Vectors to orthogonalize against after each step.
    steps : int

    Returns
    -------
    vec : ndarray (complex, unit 2-norm, first nonzero entry real positive)
    residual : float
        ``||T v - lam v||_2``.
    """
    n = T.size
    lam = complex(lam)
    # a tiny offset keeps the band LU nonsingular at an exact eigenvalue
    scale = T.row_norm()
    shift = lam + 8.0 * np.finfo(float).eps * max(scale, 1.0)
    x = np.ones(n, dtype=complex) / np.sqrt(n)
    for _ in range(steps):
        try:
            x = solve_banded((1, 1), _banded(T, shift), x, check_finite=False)
        except LinAlgError:
            shift = shift + 1e-10 * max(scale, 1.0)
            x = solve_banded((1, 1), _banded(T, shift), x, check_finite=False)
        for u in against:
            x = x - np.vdot(u, x) * u
        x = x / np.linalg.norm(x)
    x = _fix_phase(x)
    res = float(np.linalg.norm(T.matvec(x) - lam * x))
    return x, res


def _fix_phase(x):
    nz = np.flatnonzero(np.abs(x) > 0)
    if nz.size == 0:
        return x
    ref = x[nz[0]]
    return x * (abs(ref) / ref)


def eigen_all(T: TridiagonalOperator, want_vectors=False, indices=None) -> SpectrumResult:
    """All eigenvalues of ``T``, optionally with eigenvectors.

    Parameters
    ----------
    T : TridiagonalOperator
        Balancing is applied internally; pass the original operator.
    want_vectors : bool
    indices : iterable of int, optional
        Restrict eigenvector computation to these positions of the sorted
        spectrum.  Defaults to all when ``want_vectors`` is set.
    """
    lams = eigenvalues(T)
    vecs = [None] * lams.size
    res = [float("nan")] * lams.size
    if want_vectors:
        idx = range(lams.size) if indices is None else sorted(set(indices))
        done = []
        cluster = 1e-6
        for i in idx:
            lam = lams[i]
            near = [vecs[j] for j in done
                    if abs(lams[j] - lam) <= cluster * (1.0 + abs(lam))]
            vecs[i], res[i] = inverse_iteration(T, lam, near)
            done.append(i)
    pairs = [EigenPair(complex(l), v, r, False, None if v is None else _slope_or_none(v))
             for l, v, r in zip(lams, vecs, res)]
    return SpectrumResult(T.epsilon, T.size, pairs)


def _slope_or_none(vec):
    try:
        return decay_slope(vec)
    except FitError:
        return None


def filter_stable(small: SpectrumResult, large: SpectrumResult, tol=DEFAULT_TOL):
    """Pairs of ``small`` whose eigenvalue reappears in ``large``.

    A match means ``|lam_small - lam_large| <= tol * (1 + |lam_small|)``.
    The usual setting is ``large.N >= 2 * small.N``; identical inputs are
    allowed and keep everything.
    """
    if small.epsilon != large.epsilon:
        raise ValueError("spectra belong to different epsilon values")
    big = large.eigenvalues
    out = []
    if big.size == 0:
        return out
    for p in small.pairs:
        gap = np.min(np.abs(big - p.lam))
        if gap <= tol * (1.0 + abs(p.lam)):
            out.append(replace(p, stable=True))
    return out


@dataclass(frozen=True)
class MatrixSpectrum:
    """Outcome of the N versus 2N matrix pipeline.

    ``stable`` holds pairs from the N section (with vectors when requested);
    ``stable_large`` holds the matching pairs from the 2N section in the
    same order.
    """

    epsilon: float
    small: SpectrumResult
    large: SpectrumResult
    stable: list
    stable_large: list
    tol: float


def matrix_spectrum(epsilon, N=DEFAULT_N, tol=DEFAULT_TOL, closure=DEFAULT_CLOSURE,
                    want_vectors=True, large_N=None) -> MatrixSpectrum:
    """Eigenpairs of the N section that persist in the 2N section.

    Parameters
    ----------
    epsilon : float
    N : int
        Small truncation size; the large one defaults to ``2 * N``.
    tol : float
        Relative matching tolerance.
    closure : str
        Passed to :func:`build_truncated`.
    want_vectors : bool
        Compute eigenvectors for stable pairs in both sections.
    """
    eps = validate_epsilon(epsilon)
    large_N = 2 * N if large_N is None else large_N
    Ts = build_truncated(eps, N, closure)
    Tl = build_truncated(eps, large_N, closure)
    small = eigen_all(Ts)
    large = eigen_all(Tl)
    stable = filter_stable(small, large, tol)
    if not stable:
        return MatrixSpectrum(eps, small, large, [], [], tol)
    big = large.eigenvalues
    match = [int(np.argmin(np.abs(big - p.lam))) for p in stable]
    stable_large = [replace(large.pairs[j], stable=True) for j in match]
    if want_vectors:
        stable = _attach_vectors(Ts, stable)
        stable_large = _attach_vectors(Tl, stable_large)
    return MatrixSpectrum(eps, small, large, stable, stable_large, tol)


def _attach_vectors(T, pairs):
    out = []
    done = []
    for p in pairs:
        near = [v for l, v in done if abs(l - p.lam) <= 1e-6 * (1.0 + abs(p.lam))]
        vec, res = inverse_iteration(T, p.lam, near)
        done.append((p.lam, vec))
        out.append(replace(p, vector=vec, residual=res, decay_slope=_slope_or_none(vec)))
    return out
