"""scikit-learn compatible estimators."""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .glasso import GlassoOptions
from .minipatch import DEFAULT_M_OVER_N, MPGraphConfig, resolve_patch_size, run_mpgraph, stable_edge_set
from .tglasso import BaseEstimatorConfig, fit_thresholded_details

__all__ = ["MPGraph", "ThresholdedGraphicalLasso"]


def _validate(X):
    return check_array(X, dtype=np.float64, ensure_min_samples=2, ensure_min_features=2)


class ThresholdedGraphicalLasso(BaseEstimator):
    """Graphical lasso at ``sqrt(log m / n)`` followed by eBIC-tuned hard thresholding.

    Parameters
    ----------
    gamma : float, default=0.5
        Weight of the high-dimensional eBIC term.
    grid_size : int, default=10
        Number of threshold levels between 0 and the largest off-diagonal entry.
    center : bool, default=True
        Center columns before forming the covariance.

    Attributes
    ----------
    precision_ : ndarray of shape (n_features, n_features)
        Thresholded precision matrix.
    covariance_ : ndarray of shape (n_features, n_features)
        Inverse of the un-thresholded graphical-lasso precision.
    alpha_ : float
    threshold_ : float
        Selected threshold (0 when no search was needed).
    """

    def __init__(self, gamma=0.5, grid_size=10, center=True):
        self.gamma = gamma
        self.grid_size = grid_size
        self.center = center

    def fit(self, X, y=None):
        X = _validate(X)
        config = BaseEstimatorConfig(gamma=self.gamma, grid_size=self.grid_size, center=self.center)
        fit = fit_thresholded_details(X, config)
        self.precision_ = fit.precision
        self.covariance_ = fit.glasso.covariance
        self.alpha_ = fit.alpha
        self.threshold_ = fit.candidates[fit.best].tau if fit.best >= 0 else 0.0
        self.n_features_in_ = X.shape[1]
        return self

    def get_edges(self):
        check_is_fitted(self, "precision_")
        rows, cols = np.nonzero(np.triu(self.precision_, 1))
        return list(zip(rows.tolist(), cols.tolist()))


class MPGraph(BaseEstimator):
    """Graph selection by an ensemble of thresholded graphical lassos on minipatches.

    Parameters
    ----------
    n, m : int, optional
        Observations and nodes per minipatch. ``m`` defaults to
        ``round(m_frac * n_features)`` and ``n`` to ``ceil(m / 0.8)``.
    m_frac : float, default=0.05
    K : int, default=1000
        Number of minipatches.
    pi_thr : float, default=0.5
        Selection-frequency threshold for stable edges.
    gamma : float, default=0.5
    grid_size : int, default=10
    center : bool, default=True
    random_state : int, default=0
        Master seed; results are identical for any ``n_jobs``.
    n_jobs : int, default=1

    Attributes
    ----------
    frequencies_ : ndarray of shape (n_features, n_features)
        Symmetric selection frequencies, zero diagonal.
    stable_edges_ : list of tuple
    adjacency_ : ndarray of bool
    n_, m_ : int
        Resolved minipatch size.
    result_ : MPGraphResult
    """

    def __init__(self, n=None, m=None, m_frac=0.05, K=1000, pi_thr=0.5, gamma=0.5,
                 grid_size=10, center=True, random_state=0, n_jobs=1):
        self.n = n
        self.m = m
        self.m_frac = m_frac
        self.K = K
        self.pi_thr = pi_thr
        self.gamma = gamma
        self.grid_size = grid_size
        self.center = center
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self, N, M):
        n, m = resolve_patch_size(N, M, n=self.n, m=self.m, m_frac=self.m_frac,
                                  m_over_n=DEFAULT_M_OVER_N)
        seed = self.random_state
        if seed is None:
            seed = int(np.random.SeedSequence().generate_state(1)[0])
        base = BaseEstimatorConfig(gamma=self.gamma, glasso_opts=GlassoOptions(),
                                   grid_size=self.grid_size, center=self.center)
        return MPGraphConfig(n=n, m=m, K=self.K, pi_thr=self.pi_thr, base=base,
                             master_seed=int(seed), workers=self.n_jobs)

    def fit(self, X, y=None):
        X = _validate(X)
        N, M = X.shape
        config = self._config(N, M)
        result = run_mpgraph(X, config)
        freq = result.frequencies
        self.result_ = result
        self.config_ = config
        self.n_, self.m_ = config.n, config.m
        self.frequencies_ = freq + freq.T
        self.stable_edges_ = result.stable_edges
        adj = np.zeros((M, M), dtype=bool)
        for i, j in result.stable_edges:
            adj[i, j] = adj[j, i] = True
        self.adjacency_ = adj
        self.n_features_in_ = M
        return self

    def get_edges(self, pi_thr=None):
        """Stable edges at ``pi_thr`` (defaults to the fitted threshold)."""
        check_is_fitted(self, "frequencies_")
        thr = self.pi_thr if pi_thr is None else pi_thr
        return stable_edge_set(np.triu(self.frequencies_, 1), thr)
