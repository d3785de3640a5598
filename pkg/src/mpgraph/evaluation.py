"""Edge-set accuracy metrics and simulation harnesses.

Edges are unordered node pairs stored as ``(i, j)`` with ``0 <= i < j < M``.
"""

import math
import time
from dataclasses import asdict, dataclass

import numpy as np
from joblib import Parallel, delayed

from .minipatch import MPGraphConfig, resolve_patch_size, run_mpgraph
from .synth import make_model, sample_gaussian
from .tglasso import BaseEstimatorConfig

__all__ = [
    "Confusion",
    "MetricReport",
    "CurveRow",
    "BenchmarkRow",
    "normalize_edges",
    "confusion",
    "metrics",
    "exact_recovery",
    "cell_seeds",
    "curve_patch_size",
    "recovery_curve",
    "benchmark_trial",
    "run_benchmark",
]


@dataclass(frozen=True)
class Confusion:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class MetricReport:
    tpr: float
    precision: float
    f1: float
    selected_count: int
    runtime_seconds: float = 0.0


@dataclass(frozen=True)
class CurveRow:
    scenario: str
    M: int
    N: int
    trial_count: int
    recovery_rate: float  # nan when every trial failed
    failures: int


@dataclass(frozen=True)
class BenchmarkRow:
    scenario: str
    M: int
    N: int
    trial: str
    selected: int
    tpr: float
    precision: float
    f1: float
    seconds: float


def normalize_edges(edges, M=None):
    """Return a set of ``(min, max)`` pairs, checking bounds when ``M`` is given."""
    out = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if i == j:
            raise ValueError(f"self-loop ({i}, {j}) is not an edge")
        if i > j:
            i, j = j, i
        if M is not None and (i < 0 or j >= M):
            raise ValueError(f"edge ({i}, {j}) is out of range for M={M}")
        out.add((i, j))
    return out


def confusion(estimated, truth, M):
    """Confusion counts over all ``M (M - 1) / 2`` node pairs."""
    est = normalize_edges(estimated, M)
    tru = normalize_edges(truth, M)
    tp = len(est & tru)
    fp = len(est - tru)
    fn = len(tru - est)
    tn = M * (M - 1) // 2 - tp - fp - fn
    return Confusion(tp=tp, fp=fp, fn=fn, tn=tn)


def metrics(c, runtime_seconds=0.0):
    """TPR, precision and F1 of a confusion table; empty denominators give 0."""
    tpr = c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0
    precision = c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0
    f1 = 2 * precision * tpr / (precision + tpr) if precision + tpr else 0.0
    return MetricReport(
        tpr=tpr,
        precision=precision,
        f1=f1,
        selected_count=c.tp + c.fp,
        runtime_seconds=float(runtime_seconds),
    )


def exact_recovery(estimated, truth):
    return normalize_edges(estimated) == normalize_edges(truth)


def cell_seeds(seed, *key):
    """Two independent 32-bit seeds (model, data) for one experiment cell."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    model_seed, data_seed = ss.generate_state(2)
    return int(model_seed), int(data_seed)


def curve_patch_size(M, m_frac=0.2, min_m=5, n_per_m=2.0):
    """Minipatch size used by the recovery curve: ``m = max(min_m, m_frac M)``, ``n = n_per_m m``."""
    m = min(M, max(min_m, int(math.floor(m_frac * M + 0.5))))
    n = int(math.ceil(n_per_m * m))
    return n, m


def _curve_cell(scenario, M, N, trial, n, m, K, pi_thr, base, seed):
    if n > N:
        return None
    model_seed, data_seed = cell_seeds(seed, M, N, trial)
    model = make_model(scenario, M, model_seed)
    X = sample_gaussian(model, N, data_seed)
    config = MPGraphConfig(n=n, m=m, K=K, pi_thr=pi_thr, base=base, master_seed=model_seed)
    result = run_mpgraph(X, config)
    return exact_recovery(result.stable_edges, model.edges)


def recovery_curve(
    scenario,
    M_values,
    N_values,
    trials,
    *,
    m_frac=0.2,
    min_m=5,
    n_per_m=2.0,
    n=None,
    m=None,
    K=1000,
    pi_thr=0.5,
    base=None,
    seed=0,
    workers=1,
):
    """Probability of exact edge-set recovery over a grid of ``(M, N)``.

    Every cell draws a fresh model (for random scenarios) and data set per
    trial from seeds derived from ``(seed, M, N, trial)``. Trials whose
    minipatch needs more observations than ``N`` are counted as failures
    and excluded from the rate.

    Returns
    -------
    list of CurveRow
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    base = BaseEstimatorConfig() if base is None else base
    cells = []
    for M in M_values:
        n_def, m_def = curve_patch_size(M, m_frac, min_m, n_per_m)
        n_cell = n_def if n is None else n
        m_cell = m_def if m is None else m
        for N in N_values:
            for t in range(trials):
                cells.append((M, N, t, n_cell, m_cell))

    def task(cell):
        M, N, t, n_cell, m_cell = cell
        try:
            return _curve_cell(scenario, M, N, t, n_cell, m_cell, K, pi_thr, base, seed)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError):
            return None

    if workers == 1:
        outcomes = [task(c) for c in cells]
    else:
        outcomes = Parallel(n_jobs=workers)(delayed(task)(c) for c in cells)

    rows = []
    for M in M_values:
        for N in N_values:
            got = [o for c, o in zip(cells, outcomes) if c[0] == M and c[1] == N]
            ok = [o for o in got if o is not None]
            rate = float(np.mean(ok)) if ok else float("nan")
            rows.append(
                CurveRow(
                    scenario=scenario,
                    M=int(M),
                    N=int(N),
                    trial_count=len(got),
                    recovery_rate=rate,
                    failures=len(got) - len(ok),
                )
            )
    return rows


def benchmark_trial(scenario, M, N, *, n=None, m=None, m_frac=0.05, K=1000, pi_thr=0.5,
                    base=None, seed=0, trial=0, workers=1):
    """Simulate, fit and score one trial; returns ``(BenchmarkRow, MPGraphResult, model)``."""
    base = BaseEstimatorConfig() if base is None else base
    model_seed, data_seed = cell_seeds(seed, trial)
    model = make_model(scenario, M, model_seed)
    X = sample_gaussian(model, N, data_seed)
    n_r, m_r = resolve_patch_size(N, M, n=n, m=m, m_frac=m_frac)
    config = MPGraphConfig(n=n_r, m=m_r, K=K, pi_thr=pi_thr, base=base,
                           master_seed=model_seed, workers=workers)
    start = time.perf_counter()
    result = run_mpgraph(X, config)
    seconds = time.perf_counter() - start
    rep = metrics(confusion(result.stable_edges, model.edges, M), seconds)
    row = BenchmarkRow(
        scenario=scenario,
        M=M,
        N=N,
        trial=str(trial),
        selected=rep.selected_count,
        tpr=rep.tpr,
        precision=rep.precision,
        f1=rep.f1,
        seconds=seconds,
    )
    return row, result, model


def run_benchmark(scenario, M, N, trials=1, **kwargs):
    """Rows for ``trials`` benchmark trials, plus a mean row when ``trials > 1``."""
    rows = [benchmark_trial(scenario, M, N, trial=t, **kwargs)[0] for t in range(trials)]
    if trials > 1:
        rows.append(
            BenchmarkRow(
                scenario=scenario,
                M=M,
                N=N,
                trial="mean",
                selected=int(round(np.mean([r.selected for r in rows]))),
                tpr=float(np.mean([r.tpr for r in rows])),
                precision=float(np.mean([r.precision for r in rows])),
                f1=float(np.mean([r.f1 for r in rows])),
                seconds=float(np.mean([r.seconds for r in rows])),
            )
        )
    return rows


def rows_as_dicts(rows):
    return [asdict(r) for r in rows]
