"""Weighted Galerkin solver for the singular problem ``-(p u')' = mu w u`` on (0, 1).

With ``s = 1/eps``

    p(z) = (1 - z)**(1 + s) (1 + z)**(1 - s),
    w(z) = (1 - z)**s (1 + z)**(-s) / z,

and ``lam = eps mu / 2``.  Trial functions ``phi_j(z) = z P_{j-1}(2z - 1)``
(Legendre ``P``) vanish at 0, which cancels the pole of ``w``.  Both bilinear
forms are integrated with a Gauss-Jacobi rule carrying the weight
``(1 - z)**s``, so the remaining integrands are smooth on [0, 1].  The pencil
is symmetric-definite, so every computed ``mu`` is real.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import LinAlgError, cholesky, eigh, solve_triangular
from scipy.special import roots_jacobi

from .exceptions import FactorizationError, QuadratureError
from .operator import validate_epsilon

__all__ = [
    "SturmLiouvilleSystem",
    "assemble",
    "sl_spectrum",
    "sl_eigenpairs",
    "lambda_from_mu",
    "weighted_norm_sq",
    "evaluate_expansion",
    "DEFAULT_K",
    "QUAD_TOL",
]

DEFAULT_K = 200
QUAD_TOL = 1e-12
BASIS = "phi_j(z) = z * P_{j-1}(2z - 1), Legendre P, j = 1..K"


@dataclass(frozen=True)
class SturmLiouvilleSystem:
    """Galerkin matrices of the weighted problem.

    Attributes
    ----------
    epsilon : float
    K : int
        Number of basis functions.
    stiffness : ndarray
        ``S_ij = integral p phi_i' phi_j'``.
    mass : ndarray
        ``M_ij = integral w phi_i phi_j``.
    basis : str
        Description of the trial space.
    nodes : int
        Gauss-Jacobi points used.
    quad_error : float
        Largest entry change against a rule with twice the points, relative
        to the largest entry of the same matrix.
    """

    epsilon: float
    K: int
    stiffness: np.ndarray = field(repr=False)
    mass: np.ndarray = field(repr=False)
    basis: str = BASIS
    nodes: int = 0
    quad_error: float = 0.0


def _legendre_with_derivative(x, K):
    """Values and derivatives of ``P_0..P_{K-1}`` at ``x`` (shape (len(x), K))."""
    P = np.zeros((x.size, K))
    D = np.zeros((x.size, K))
    P[:, 0] = 1.0
    if K > 1:
        P[:, 1] = x
        D[:, 1] = 1.0
    for j in range(1, K - 1):
        P[:, j + 1] = ((2 * j + 1) * x * P[:, j] - j * P[:, j - 1]) / (j + 1)
        D[:, j + 1] = D[:, j - 1] + (2 * j + 1) * P[:, j]
    return P, D


def _basis(z, K, deriv=0):
    x = 2.0 * z - 1.0
    P, D = _legendre_with_derivative(x, K)
    if deriv == 0:
        return z[:, None] * P
    return P + 2.0 * z[:, None] * D


def _matrices(eps, K, nq):
    s = 1.0 / eps
    x, wts = roots_jacobi(nq, s, 0.0)
    z = 0.5 * (x + 1.0)
    # integral_0^1 (1-z)**s f dz = 0.5**(s+1) * sum wts f(z_i)
    wq = wts * 0.5 ** (s + 1.0)
    P, D = _legendre_with_derivative(2.0 * z - 1.0, K)
    dphi = P + 2.0 * z[:, None] * D
    ks = wq * (1.0 - z) * (1.0 + z) ** (1.0 - s)
    km = wq * z * (1.0 + z) ** (-s)
    S = (dphi * ks[:, None]).T @ dphi
    M = (P * km[:, None]).T @ P
    return 0.5 * (S + S.T), 0.5 * (M + M.T)


def _worst(a, b):
    scale = max(np.max(np.abs(a)), 1e-300)
    diff = np.abs(a - b) / scale
    idx = np.unravel_index(int(np.argmax(diff)), diff.shape)
    return float(diff[idx]), idx


def assemble(epsilon, K=DEFAULT_K, nodes=None, tol=QUAD_TOL, max_refinements=3):
    """Stiffness and mass matrices for ``K`` basis functions.

    Parameters
    ----------
    epsilon : float
        In (0, 2); integer 1/epsilon is allowed here.
    K : int
    nodes : int, optional
        Initial number of quadrature points (default ``K + 40``).
    tol : float
        Required agreement with the doubled rule, relative to the largest entry.
    max_refinements : int

    Raises
    ------
    QuadratureError
        The doubled rule still disagrees; ``index`` is the worst (row, col).
    """
    eps = validate_epsilon(epsilon)
    K = int(K)
    if K < 1:
        raise ValueError("K must be a positive integer")
    nq = int(nodes) if nodes is not None else K + 40
    S, M = _matrices(eps, K, nq)
    for _ in range(max_refinements):
        S2, M2 = _matrices(eps, K, 2 * nq)
        es, is_ = _worst(S, S2)
        em, im = _worst(M, M2)
        S, M, nq = S2, M2, 2 * nq
        err = max(es, em)
        if err <= tol:
            return SturmLiouvilleSystem(eps, K, S, M, BASIS, nq, err)
    which, idx = ("stiffness", is_) if es >= em else ("mass", im)
    raise QuadratureError(f"{which} entry did not converge under refinement (change {err:.3g})",
                          index=tuple(int(i) for i in idx))


def _reduced(sys):
    try:
        L = cholesky(sys.mass, lower=True)
    except LinAlgError as exc:
        raise FactorizationError(f"mass matrix is not positive definite: {exc}") from exc
    X = solve_triangular(L, sys.stiffness, lower=True)
    A = solve_triangular(L, X.T, lower=True)
    return L, 0.5 * (A + A.T)


def sl_eigenpairs(sys: SturmLiouvilleSystem, count):
    """Smallest ``count`` eigenvalues and basis coefficients (columns)."""
    count = int(count)
    if not 1 <= count <= sys.K:
        raise ValueError("count must satisfy 1 <= count <= K")
    L, A = _reduced(sys)
    mu, Y = eigh(A, subset_by_index=[0, count - 1])
    C = solve_triangular(L.T, Y, lower=False)
    return mu, C


def sl_spectrum(sys: SturmLiouvilleSystem, count):
    """Smallest ``count`` eigenvalues ``mu`` in ascending order.

    The generalized problem is reduced with the Cholesky factor of the mass
    matrix to a standard symmetric one, so the results are real.

    Raises
    ------
    FactorizationError
        The mass matrix does not factor.
    """
    mu, _ = sl_eigenpairs(sys, count)
    return [float(m) for m in mu]


def lambda_from_mu(epsilon, mu):
    """``lam = eps mu / 2``."""
    return 0.5 * float(epsilon) * mu


def weighted_norm_sq(u_coeffs, sys: SturmLiouvilleSystem) -> float:
    """``c^T M c``, the squared weighted L2 norm of the expansion."""
    c = np.asarray(u_coeffs, dtype=float)
    if c.shape != (sys.K,):
        raise ValueError(f"coefficient vector must have length K = {sys.K}")
    return float(c @ sys.mass @ c)


def evaluate_expansion(u_coeffs, z, deriv=0):
    """Value (``deriv=0``) or derivative (``deriv=1``) of ``sum c_j phi_j`` at ``z``."""
    c = np.asarray(u_coeffs, dtype=float)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if deriv not in (0, 1):
        raise ValueError("deriv must be 0 or 1")
    return _basis(z, c.size, deriv) @ c
