"""Dense symmetric matrix kernels.

All functions are pure and take plain ``numpy`` arrays. Symmetric inputs
are symmetrized from their lower triangle, which is treated as
authoritative.
"""

import numpy as np

from .exceptions import NotPositiveDefiniteError, NumericalFailureError

__all__ = [
    "as_symmetric",
    "sample_covariance",
    "cholesky",
    "log_det_pd",
    "invert_pd",
    "min_eigenvalue",
]


def as_symmetric(A):
    """Return a float copy of square ``A`` rebuilt from its lower triangle."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    low = np.tril(A)
    return low + np.tril(A, -1).T


def sample_covariance(patch, center=True):
    """Maximum-likelihood covariance ``X.T @ X / n`` of an ``n x m`` patch.

    Parameters
    ----------
    patch : array-like of shape (n, m)
        Observations in rows.
    center : bool, default=True
        Subtract column means first. Disable for data known to be zero-mean.

    Returns
    -------
    ndarray of shape (m, m)
    """
    X = np.asarray(patch, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0 or X.shape[1] == 0:
        raise ValueError(f"patch must be a non-empty 2-D array, got shape {X.shape}")
    if center:
        X = X - X.mean(axis=0)
    S = X.T @ X / X.shape[0]
    return 0.5 * (S + S.T)


def cholesky(A):
    """Lower Cholesky factor of ``A``; raises if any pivot is not positive."""
    A = as_symmetric(A)
    try:
        return np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc


def log_det_pd(A):
    """``log det A`` via the Cholesky factor."""
    L = cholesky(A)
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def invert_pd(A):
    """Inverse of a positive definite matrix, returned exactly symmetric."""
    L = cholesky(A)
    Linv = np.linalg.solve(L, np.eye(L.shape[0]))
    inv = Linv.T @ Linv
    return 0.5 * (inv + inv.T)


def min_eigenvalue(A, tol=1e-6):
    """Smallest eigenvalue of a symmetric matrix.

    Uses a full symmetric eigendecomposition (LAPACK ``syevd``), whose
    absolute error is far below ``tol`` for the matrix sizes used here.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = as_symmetric(A)
    try:
        w = np.linalg.eigvalsh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailureError("eigenvalue iteration did not converge") from exc
    return float(w[0])
