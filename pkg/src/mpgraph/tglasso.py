"""Thresholded graphical lasso base estimator.

One minipatch is handled as follows. Fit the graphical lasso at
``alpha0 = sqrt(log m / n)``, then hard-threshold the off-diagonal entries
over ten levels ``0.1 t, 0.2 t, ..., t`` where ``t`` is the largest
off-diagonal magnitude. The level that minimizes the extended BIC

    -2 loglik + e log n + 4 e gamma log m

wins, where ``e`` is the number of retained edges.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import DegenerateInputError, NotPositiveDefiniteError
from .glasso import GlassoFit, GlassoOptions, fit_glasso
from .linalg import log_det_pd, min_eigenvalue, sample_covariance

__all__ = [
    "BaseEstimatorConfig",
    "ThresholdCandidate",
    "ThresholdedFit",
    "hard_threshold",
    "edge_count",
    "gaussian_loglik",
    "ebic_score",
    "default_alpha",
    "fit_thresholded",
    "fit_thresholded_details",
]


@dataclass(frozen=True)
class BaseEstimatorConfig:
    gamma: float = 0.5
    glasso_opts: GlassoOptions = field(default_factory=GlassoOptions)
    grid_size: int = 10
    center: bool = True

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
        if self.grid_size < 1:
            raise ValueError("grid_size must be positive")


@dataclass
class ThresholdCandidate:
    tau: float
    thresholded: np.ndarray = field(repr=False)
    edge_count: int
    loglik: float  # nan when the thresholded matrix is not positive definite
    ebic: float  # inf when the thresholded matrix is not positive definite


@dataclass
class ThresholdedFit:
    precision: np.ndarray
    glasso: GlassoFit = field(repr=False)
    alpha: float
    theta_max: float
    candidates: list = field(repr=False, default_factory=list)
    best: int = -1  # index into candidates; -1 when no search was needed
    all_non_pd: bool = False


def hard_threshold(Theta, tau):
    """Zero the off-diagonal entries with ``|Theta_ij| <= tau``.

    The diagonal is never touched. Entries exactly at ``tau`` are removed so
    that the top grid level ``tau = max |Theta_ij|`` is the empty graph.
    ``tau = 0`` leaves the matrix unchanged.
    """
    if tau < 0:
        raise ValueError("tau must be nonnegative")
    out = np.array(Theta, dtype=float, copy=True)
    mask = np.abs(out) <= tau
    np.fill_diagonal(mask, False)
    out[mask] = 0.0
    return out


def edge_count(Theta):
    """Number of nonzero entries strictly above the diagonal."""
    return int(np.count_nonzero(np.triu(Theta, 1)))


def gaussian_loglik(Theta, S, n):
    """Gaussian log-likelihood ``n/2 (log det Theta - tr(S Theta))``.

    The ``-(n m / 2) log(2 pi)`` constant is omitted.
    """
    return 0.5 * n * (log_det_pd(Theta) - float(np.sum(np.asarray(S) * Theta)))


def ebic_score(Theta, S, n, m, gamma):
    """Extended BIC of a precision estimate; ``inf`` if not positive definite."""
    try:
        ll = gaussian_loglik(Theta, S, n)
    except NotPositiveDefiniteError:
        return np.inf
    e = edge_count(Theta)
    return -2.0 * ll + e * np.log(n) + 4.0 * e * gamma * np.log(m)


def default_alpha(n, m):
    """Base regularization level ``sqrt(log m / n)``."""
    return float(np.sqrt(np.log(m) / n))


def fit_thresholded_details(patch, config=None):
    """Run the base estimator on an ``n x m`` patch and keep all intermediates."""
    config = BaseEstimatorConfig() if config is None else config
    X = np.asarray(patch, dtype=float)
    if X.ndim != 2:
        raise ValueError("patch must be 2-D")
    n, m = X.shape
    if n < 2 or m < 2:
        raise ValueError(f"patch must be at least 2 x 2, got {n} x {m}")

    S = sample_covariance(X, center=config.center)
    if np.any(np.diag(S) <= 0):
        col = int(np.flatnonzero(np.diag(S) <= 0)[0])
        raise DegenerateInputError(f"patch column {col} is constant")

    alpha = default_alpha(n, m)
    opts = config.glasso_opts
    opts = GlassoOptions(
        alpha=alpha,
        penalize_diagonal=opts.penalize_diagonal,
        outer_tol=opts.outer_tol,
        inner_tol=opts.inner_tol,
        max_outer_iters=opts.max_outer_iters,
        max_inner_iters=opts.max_inner_iters,
    )
    gl = fit_glasso(S, opts)
    Theta = gl.precision

    theta_max = float(np.max(np.abs(Theta[np.triu_indices(m, 1)])))
    if theta_max == 0.0:
        return ThresholdedFit(precision=Theta.copy(), glasso=gl, alpha=alpha, theta_max=0.0)

    candidates = []
    for step in range(1, config.grid_size + 1):
        tau = theta_max * (step / config.grid_size)
        T = hard_threshold(Theta, tau)
        try:
            ll = gaussian_loglik(T, S, n)
        except NotPositiveDefiniteError:
            ll = np.nan
        e = edge_count(T)
        if np.isnan(ll):
            score = np.inf
        else:
            score = -2.0 * ll + e * np.log(n) + 4.0 * e * config.gamma * np.log(m)
        candidates.append(ThresholdCandidate(tau=tau, thresholded=T, edge_count=e, loglik=ll, ebic=score))

    scores = np.array([c.ebic for c in candidates])
    if np.all(np.isinf(scores)):
        # every level broke positive definiteness; keep the densest support
        best = 0
        T = candidates[0].thresholded
        lam_min = min_eigenvalue(T)
        inflated = T + (abs(lam_min) + 1e-3) * np.eye(m)
        candidates[0].loglik = gaussian_loglik(inflated, S, n)
        return ThresholdedFit(
            precision=T.copy(),
            glasso=gl,
            alpha=alpha,
            theta_max=theta_max,
            candidates=candidates,
            best=best,
            all_non_pd=True,
        )

    # ties go to the larger tau, i.e. the sparser graph
    best = int(len(scores) - 1 - np.argmin(scores[::-1]))
    return ThresholdedFit(
        precision=candidates[best].thresholded.copy(),
        glasso=gl,
        alpha=alpha,
        theta_max=theta_max,
        candidates=candidates,
        best=best,
    )


def fit_thresholded(patch, config=None):
    """Thresholded precision estimate of one minipatch.

    Parameters
    ----------
    patch : array-like of shape (n, m)
    config : BaseEstimatorConfig, optional

    Returns
    -------
    ndarray of shape (m, m)
        Symmetric, with the graphical-lasso diagonal kept. Its nonzero
        off-diagonal pattern is the selected subgraph.
    """
    return fit_thresholded_details(patch, config).precision
