"""Dense linear-algebra kernel: nullspace bases, pseudo-inverses, symmetric and
generalized symmetric eigenproblems, SPD solves.

All functions are pure and operate on plain numpy arrays (row-major, float64).
Target sizes are a few hundred at most, so everything is dense.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import InvalidProblem, NotPositiveDefinite, RankDeficient

# Singular values below DEFAULT_RANK_TOL * sigma_max count as zero; this sits at
# the double-precision SVD noise floor for desk-scale matrices.
DEFAULT_RANK_TOL = 1e-10


def as_matrix(M, name="matrix"):
    """Coerce to a 2-D float64 array and reject non-finite entries."""
    A = np.asarray(M, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise InvalidProblem(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.size and not np.all(np.isfinite(A)):
        raise InvalidProblem(f"{name} contains NaN or Inf entries")
    return A


def as_vector(v, name="vector"):
    x = np.asarray(v, dtype=float).reshape(-1)
    if x.size and not np.all(np.isfinite(x)):
        raise InvalidProblem(f"{name} contains NaN or Inf entries")
    return x


@dataclass(frozen=True)
class SymEigResult:
    """Eigendecomposition of a symmetric matrix, eigenvalues descending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # orthonormal columns, eigenvectors[:, i] <-> eigenvalues[i]


def sym_eig(A):
    """Full symmetric eigendecomposition with eigenvalues sorted descending."""
    A = as_matrix(A, "symmetric matrix")
    w, V = np.linalg.eigh(0.5 * (A + A.T))
    return SymEigResult(w[::-1].copy(), V[:, ::-1].copy())


def orthonormal_nullspace(M, tol=DEFAULT_RANK_TOL):
    """Orthonormal basis (columns) of ker(M), rank cut at sigma < tol * sigma_max.

    Returns an n x k matrix with k = dim ker(M); k = 0 gives an n x 0 matrix.
    """
    M = as_matrix(M, "nullspace input")
    if tol <= 0:
        raise InvalidProblem("tol must be positive")
    n = M.shape[1]
    if M.shape[0] == 0 or n == 0:
        return np.eye(n)
    _, s, Vt = np.linalg.svd(M)
    cut = tol * (s[0] if s.size else 0.0)
    rank = int(np.sum(s > cut))
    return Vt[rank:].T.copy()


def pseudo_inverse(M, tol=DEFAULT_RANK_TOL):
    """Right pseudo-inverse M^T (M M^T)^{-1} of a full-row-rank matrix.

    Computed through the SVD, which also yields the minimal-Frobenius-norm
    right inverse.  Raises RankDeficient when the smallest singular value
    falls below tol * sigma_max, i.e. when rows are numerically redundant.
    """
    M = as_matrix(M, "pseudo-inverse input")
    m, n = M.shape
    if m == 0:
        return np.zeros((n, 0))
    if m > n:
        raise RankDeficient(f"matrix has more rows ({m}) than columns ({n})")
    U, s, Vt = np.linalg.svd(M)
    if s.size < m or s[m - 1] <= tol * s[0]:
        raise RankDeficient(
            f"rows numerically dependent (sigma_min/sigma_max = {s[m-1] / s[0]:.3e})"
        )
    return (Vt[:m].T / s) @ U.T


def solve_spd(T, B):
    """Solve T X = B for symmetric positive definite T via Cholesky."""
    T = as_matrix(T, "SPD matrix")
    try:
        factor = sla.cho_factor(T, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    except sla.LinAlgError as exc:  # pragma: no cover - scipy alias
        raise NotPositiveDefinite(str(exc)) from exc
    return sla.cho_solve(factor, np.asarray(B, dtype=float))


def gen_eig_max(C, T):
    """Largest generalized eigenvalue lambda with C v = lambda T v, plus v.

    C must be symmetric, T symmetric positive definite.  The problem is
    reduced via T = L L^T to the standard symmetric eigenproblem for
    L^{-1} C L^{-T}, preserving symmetry.  The returned eigenvector is
    normalized so that v^T T v = 1.
    """
    C = as_matrix(C, "pencil numerator")
    T = as_matrix(T, "pencil denominator")
    if C.shape != T.shape or C.shape[0] != C.shape[1]:
        raise InvalidProblem("pencil matrices must be square and conformable")
    if C.shape[0] == 0:
        raise InvalidProblem("empty pencil")
    try:
        L = sla.cholesky(0.5 * (T + T.T), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from exc
    W = sla.solve_triangular(L, 0.5 * (C + C.T), lower=True)
    Mstd = sla.solve_triangular(L, W.T, lower=True).T
    w, V = np.linalg.eigh(0.5 * (Mstd + Mstd.T))
    v = sla.solve_triangular(L.T, V[:, -1], lower=False)
    nrm = float(v @ T @ v)
    if nrm > 0:
        v = v / np.sqrt(nrm)
    return float(w[-1]), v
