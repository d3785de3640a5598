"""Minipatch ensemble for stable edge selection.

Each of ``K`` iterations draws ``n`` observations and ``m`` nodes uniformly
without replacement, fits the thresholded graphical lasso to that
submatrix, and records, for every pair of sampled nodes, that the pair was
co-sampled and whether an edge was selected. Selection frequencies are
``selected / max(1, co-sampled)`` and the stable edge set keeps pairs whose
frequency reaches ``pi_thr``.

Iteration ``k`` draws from its own generator seeded by
``SeedSequence(master_seed, spawn_key=(k,))``, so results do not depend on
how iterations are spread over workers.
"""

import hashlib
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .exceptions import DegenerateInputError
from .tglasso import BaseEstimatorConfig, fit_thresholded_details

__all__ = [
    "DEFAULT_M_FRAC",
    "DEFAULT_M_OVER_N",
    "MPGraphConfig",
    "Minipatch",
    "SelectionState",
    "MPGraphResult",
    "CoverageReport",
    "iteration_rng",
    "resolve_patch_size",
    "sample_minipatch",
    "update_counters",
    "selection_frequencies",
    "stable_edge_set",
    "coverage_diagnostics",
    "run_mpgraph",
]

DEFAULT_M_FRAC = 0.05
DEFAULT_M_OVER_N = 0.8


@dataclass(frozen=True)
class MPGraphConfig:
    n: int
    m: int
    K: int = 1000
    pi_thr: float = 0.5
    base: BaseEstimatorConfig = field(default_factory=BaseEstimatorConfig)
    master_seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.n < 2 or self.m < 2:
            raise ValueError(f"minipatch must be at least 2 x 2, got n={self.n}, m={self.m}")
        if self.K < 0:
            raise ValueError("K must be nonnegative")
        if not 0.0 < self.pi_thr < 1.0:
            raise ValueError(f"pi_thr must lie in (0, 1), got {self.pi_thr}")
        if self.workers < 1:
            raise ValueError("workers must be positive")

    def to_dict(self):
        gl = self.base.glasso_opts
        return {
            "n": self.n,
            "m": self.m,
            "K": self.K,
            "pi_thr": self.pi_thr,
            "gamma": self.base.gamma,
            "grid_size": self.base.grid_size,
            "center": self.base.center,
            "penalize_diagonal": gl.penalize_diagonal,
            "outer_tol": gl.outer_tol,
            "inner_tol": gl.inner_tol,
            "max_outer_iters": gl.max_outer_iters,
            "max_inner_iters": gl.max_inner_iters,
            "master_seed": self.master_seed,
            "workers": self.workers,
        }


@dataclass(frozen=True)
class Minipatch:
    obs_idx: np.ndarray
    node_idx: np.ndarray
    k: int


@dataclass
class SelectionState:
    s_counts: np.ndarray
    d_counts: np.ndarray
    patches_done: int = 0
    failed_fits: int = 0
    skipped: int = 0

    @classmethod
    def empty(cls, M):
        return cls(
            s_counts=np.zeros((M, M), dtype=np.int64),
            d_counts=np.zeros((M, M), dtype=np.int64),
        )


@dataclass
class MPGraphResult:
    frequencies: np.ndarray
    stable_edges: list
    config: MPGraphConfig
    state: SelectionState = field(repr=False)

    def stable_edges_at(self, pi_thr):
        return stable_edge_set(self.frequencies, pi_thr)


@dataclass(frozen=True)
class CoverageReport:
    expected_cosamples: float
    floor: float
    warning: bool


def iteration_rng(master_seed, k):
    """Generator for iteration ``k``; independent of execution order."""
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(k,)))


def resolve_patch_size(N, M, n=None, m=None, m_frac=DEFAULT_M_FRAC, m_over_n=DEFAULT_M_OVER_N):
    """Fill in missing minipatch dimensions.

    ``m`` defaults to ``round(m_frac * M)`` (at least 2), or to
    ``floor(m_over_n * n)`` when only ``n`` is given and ``m_frac`` is None.
    ``n`` defaults to ``ceil(m / m_over_n)``. Derived values are clamped to
    the data size with a warning.
    """
    if m is None:
        if m_frac is None and n is not None:
            m = int(math.floor(m_over_n * n))
        else:
            frac = DEFAULT_M_FRAC if m_frac is None else m_frac
            m = int(math.floor(frac * M + 0.5))
        m = max(2, m)
        if m > M:
            warnings.warn(f"minipatch node count {m} clamped to M={M}")
            m = M
    if n is None:
        n = int(math.ceil(m / m_over_n - 1e-9))
        if n > N:
            warnings.warn(f"minipatch observation count {n} clamped to N={N}")
            n = N
    return int(n), int(m)


def sample_minipatch(rng, N, M, n, m, k):
    """Draw sorted observation and node indices without replacement."""
    if not 1 <= n <= N:
        raise ValueError(f"cannot draw n={n} observations from N={N}")
    if not 1 <= m <= M:
        raise ValueError(f"cannot draw m={m} nodes from M={M}")
    obs = np.sort(rng.choice(N, size=n, replace=False))
    nodes = np.sort(rng.choice(M, size=m, replace=False))
    return Minipatch(obs_idx=obs, node_idx=nodes, k=k)


def _local_pairs(m):
    return np.triu_indices(m, 1)


def update_counters(state, patch, theta_tilde):
    """Add one minipatch's co-sampling and edge-selection events in place."""
    theta_tilde = np.asarray(theta_tilde)
    m = len(patch.node_idx)
    if theta_tilde.shape != (m, m):
        raise ValueError(f"estimate has shape {theta_tilde.shape}, expected ({m}, {m})")
    a, b = _local_pairs(m)
    selected = theta_tilde[a, b] != 0
    _apply(state, patch.node_idx, selected)
    return state


def _apply(state, nodes, selected):
    a, b = _local_pairs(len(nodes))
    i, j = nodes[a], nodes[b]
    state.d_counts[i, j] += 1
    state.s_counts[i[selected], j[selected]] += 1
    state.patches_done += 1


def selection_frequencies(state):
    """Upper-triangular ``s / max(1, d)``; pairs never sampled together get 0."""
    freq = state.s_counts / np.maximum(1, state.d_counts)
    return np.triu(freq, 1)


def stable_edge_set(frequencies, pi_thr):
    """Sorted list of pairs ``(i, j)``, ``i < j``, with frequency ``>= pi_thr``."""
    rows, cols = np.nonzero(np.triu(frequencies >= pi_thr, 1))
    return list(zip(rows.tolist(), cols.tolist()))


def coverage_diagnostics(config, M, floor=10.0):
    """Expected number of minipatches in which a given pair is co-sampled."""
    m = config.m
    if M < 2:
        expected = 0.0
    else:
        expected = config.K * m * (m - 1) / (M * (M - 1))
    low = expected < floor
    if low:
        warnings.warn(
            f"each node pair is expected to be co-sampled only {expected:.3g} times "
            f"(floor {floor}); selection frequencies will be coarse"
        )
    return CoverageReport(expected_cosamples=float(expected), floor=float(floor), warning=bool(low))


def _run_block(X, config, ks):
    N, M = X.shape
    out = []
    a, b = _local_pairs(config.m)
    for k in ks:
        patch = sample_minipatch(iteration_rng(config.master_seed, k), N, M, config.n, config.m, k)
        sub = X[np.ix_(patch.obs_idx, patch.node_idx)]
        try:
            fit = fit_thresholded_details(sub, config.base)
        except DegenerateInputError:
            out.append((k, patch.node_idx, None, False))
            continue
        selected = fit.precision[a, b] != 0
        out.append((k, patch.node_idx, selected, fit.glasso.converged))
    return out


def _log_record(k, nodes, selected, converged, m):
    rec = {
        "k": int(k),
        "nodes_sha1": hashlib.sha1(np.asarray(nodes, dtype="<i8").tobytes()).hexdigest(),
        "nodes": [int(v) for v in nodes],
    }
    if selected is None:
        rec.update(status="skipped", edge_count=0, converged=False, edges=[])
        return rec
    a, b = _local_pairs(m)
    edges = [[int(nodes[p]), int(nodes[q])] for p, q in zip(a[selected], b[selected])]
    rec.update(status="ok", edge_count=len(edges), converged=bool(converged), edges=edges)
    return rec


def run_mpgraph(X, config, log=None):
    """Run the minipatch ensemble on an ``N x M`` data matrix.

    Parameters
    ----------
    X : array-like of shape (N, M)
    config : MPGraphConfig
    log : file-like, optional
        Receives one JSON line per minipatch (``k``, node digest and list,
        selected global edges, edge count, convergence flag).

    Returns
    -------
    MPGraphResult
    """
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array")
    if not np.all(np.isfinite(X)):
        r, c = np.argwhere(~np.isfinite(X))[0]
        raise ValueError(f"X has a non-finite value at row {r}, column {c}")
    N, M = X.shape
    if config.n > N:
        raise ValueError(f"minipatch n={config.n} exceeds N={N}")
    if config.m > M:
        raise ValueError(f"minipatch m={config.m} exceeds M={M}")

    blocks = [blk for blk in np.array_split(np.arange(config.K), config.workers) if blk.size]
    if config.workers == 1 or len(blocks) <= 1:
        parts = [_run_block(X, config, blk) for blk in blocks]
    else:
        parts = Parallel(n_jobs=config.workers, backend="threading")(
            delayed(_run_block)(X, config, blk) for blk in blocks
        )

    state = SelectionState.empty(M)
    for part in parts:
        for k, nodes, selected, converged in part:
            if selected is None:
                state.skipped += 1
            else:
                _apply(state, nodes, selected)
                if not converged:
                    state.failed_fits += 1
            if log is not None:
                log.write(json.dumps(_log_record(k, nodes, selected, converged, config.m)) + "\n")

    freq = selection_frequencies(state)
    return MPGraphResult(
        frequencies=freq,
        stable_edges=stable_edge_set(freq, config.pi_thr),
        config=config,
        state=state,
    )
