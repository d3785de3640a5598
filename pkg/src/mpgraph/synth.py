"""Ground-truth Gaussian graphical models for simulation studies.

Three graph families are provided: a chain, an Erdos-Renyi graph with
exactly ``M - 1`` edges, and a Watts-Strogatz small-world graph (ring of
degree two, rewiring probability 0.5). Edge weights of the random families
are drawn uniformly from ``[-0.6, -0.3] U [0.3, 0.6]`` on a unit diagonal.

Random weights can make the precision matrix indefinite. When the smallest
eigenvalue falls below ``MIN_EIGENVALUE`` the diagonal is shifted up by the
deficit; the support is unchanged and ``pd_repair_applied`` is set.

Node indices are 0-based throughout.
"""

from dataclasses import dataclass, field
from functools import cached_property

import networkx as nx
import numpy as np

from .linalg import cholesky, invert_pd, min_eigenvalue

__all__ = [
    "SCENARIOS",
    "MIN_EIGENVALUE",
    "GroundTruthModel",
    "chain_precision",
    "erdos_renyi_precision",
    "small_world_precision",
    "make_model",
    "sample_gaussian",
]

SCENARIOS = ("chain", "er", "sw")
MIN_EIGENVALUE = 0.05


@dataclass
class GroundTruthModel:
    precision: np.ndarray = field(repr=False)
    scenario: str
    pd_repair_applied: bool = False
    seed: int | None = None

    @property
    def M(self):
        return self.precision.shape[0]

    @cached_property
    def covariance(self):
        return invert_pd(self.precision)

    @cached_property
    def edges(self):
        rows, cols = np.nonzero(np.triu(self.precision, 1))
        return frozenset(zip(rows.tolist(), cols.tolist()))

    def to_text(self):
        """Header lines plus ``i<TAB>j<TAB>weight`` rows (1-based, diagonal included)."""
        lines = [
            f"# scenario: {self.scenario}",
            f"# M: {self.M}",
            f"# seed: {'none' if self.seed is None else self.seed}",
            f"# pd_repair_applied: {str(self.pd_repair_applied).lower()}",
        ]
        P = self.precision
        rows, cols = np.nonzero(np.triu(P))
        for i, j in zip(rows, cols):
            lines.append(f"{i + 1}\t{j + 1}\t{float(P[i, j])!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        header = {}
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                header[key.strip()] = value.strip()
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 3 tab-separated fields")
            entries.append((int(parts[0]) - 1, int(parts[1]) - 1, float(parts[2])))
        M = int(header["M"])
        P = np.zeros((M, M))
        for i, j, w in entries:
            P[i, j] = P[j, i] = w
        seed = header.get("seed", "none")
        return cls(
            precision=P,
            scenario=header["scenario"],
            pd_repair_applied=header.get("pd_repair_applied") == "true",
            seed=None if seed == "none" else int(seed),
        )


def _repair(P):
    lam = min_eigenvalue(P)
    if lam < MIN_EIGENVALUE:
        P = P + (MIN_EIGENVALUE - lam) * np.eye(P.shape[0])
        return P, True
    return P, False


def _signed_weights(rng, size):
    mag = rng.uniform(0.3, 0.6, size=size)
    sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
    return sign * mag


def _weighted_precision(rows, cols, rng, M):
    P = np.eye(M)
    w = _signed_weights(rng, len(rows))
    P[rows, cols] = w
    P[cols, rows] = w
    return _repair(P)


def chain_precision(M):
    """Tridiagonal precision: 1.25 on the diagonal, 0.6 next to it."""
    if M < 2:
        raise ValueError("chain graph needs M >= 2")
    P = 1.25 * np.eye(M)
    idx = np.arange(M - 1)
    P[idx, idx + 1] = 0.6
    P[idx + 1, idx] = 0.6
    return GroundTruthModel(precision=P, scenario="chain")


def erdos_renyi_precision(M, random_state=None):
    """Random graph with exactly ``M - 1`` edges drawn uniformly from all pairs."""
    if M < 2:
        raise ValueError("Erdos-Renyi graph needs M >= 2")
    rng = np.random.default_rng(random_state)
    iu, ju = np.triu_indices(M, 1)
    pick = np.sort(rng.choice(iu.size, size=M - 1, replace=False))
    P, repaired = _weighted_precision(iu[pick], ju[pick], rng, M)
    return GroundTruthModel(precision=P, scenario="er", pd_repair_applied=repaired)


def small_world_precision(M, random_state=None, rewire_prob=0.5):
    """Watts-Strogatz graph: ring with one neighbor per side, then rewiring.

    Each ring edge ``(u, u+1)`` is re-targeted with probability
    ``rewire_prob`` to a uniformly chosen node, redrawing on self-loops and
    duplicates, so the edge count stays ``M``.
    """
    if M < 4:
        raise ValueError("small-world graph needs M >= 4")
    rng = np.random.default_rng(random_state)
    G = nx.watts_strogatz_graph(M, 2, rewire_prob, seed=rng)
    pairs = sorted((min(u, v), max(u, v)) for u, v in G.edges())
    rows = np.array([p[0] for p in pairs], dtype=int)
    cols = np.array([p[1] for p in pairs], dtype=int)
    P, repaired = _weighted_precision(rows, cols, rng, M)
    return GroundTruthModel(precision=P, scenario="sw", pd_repair_applied=repaired)


def make_model(scenario, M, seed=None):
    """Build a ground-truth model by scenario name (``chain``, ``er``, ``sw``)."""
    if scenario == "chain":
        model = chain_precision(M)
    elif scenario == "er":
        model = erdos_renyi_precision(M, seed)
    elif scenario == "sw":
        model = small_world_precision(M, seed)
    else:
        raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    model.seed = seed
    return model


def sample_gaussian(model, N, random_state=None):
    """Draw ``N`` i.i.d. rows from ``N(0, inv(precision))``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    rng = np.random.default_rng(random_state)
    L = cholesky(model.covariance)
    Z = rng.standard_normal((N, model.M))
    return Z @ L.T
