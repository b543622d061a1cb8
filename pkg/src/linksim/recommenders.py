"""Link recommenders: one candidate per treated node per timestep.

Three variants: friend-of-friend (uniform over distance-2), latent softmax
over embedding inner products, and top-scoring Adamic-Adar among distance-2
candidates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import Graph


@dataclass(frozen=True)
class RecommenderSpec:
    kind: str = "fof"  # fof | latent | adamic_adar
    beta: float = 10.0  # latent softmax temperature

    def __post_init__(self):
        if self.kind not in ("fof", "latent", "adamic_adar"):
            raise ValueError(f"unknown recommender kind {self.kind!r}")
        if not math.isfinite(self.beta) or self.beta < 0:
            raise ValueError("beta must be finite and >= 0")


# Rejection sampling keeps friend-of-friend draws O(1)-ish on dense graphs;
# fall back to the exact pool when misses pile up (sparse graphs).
_FOF_MAX_TRIES = 8


def recommend_fof(g: Graph, i: int, rng: np.random.Generator) -> int | None:
    """Uniform draw from distance2(i); None when the pool is empty."""
    ids = g.alive_ids()
    n = len(ids)
    if n > 2:
        for _ in range(_FOF_MAX_TRIES):
            w = int(ids[rng.integers(n)])
            if w == i or g.has_edge(i, w):
                continue
            if g.has_two_path(i, w):
                return w
    pool = g.distance2(i)
    if len(pool) == 0:
        return None
    return int(pool[rng.integers(len(pool))])


def latent_probabilities(g: Graph, i: int, beta: float
                         ) -> tuple[np.ndarray, np.ndarray]:
    """Candidate pool (alive, not i, not a neighbor of i) and its softmax
    distribution over beta-scaled inner products with i."""
    ids = g.alive_ids()
    keep = (ids != i) & (g._A[i, : g.n_nodes][ids] == 0)
    pool = ids[keep]
    if len(pool) == 0:
        return pool, np.empty(0)
    scores = g.emb[pool] @ g.emb[i]
    z = beta * scores
    z -= z.max()  # shift invariance; guards exp overflow
    w = np.exp(z)
    return pool, w / w.sum()


def recommend_latent(g: Graph, i: int, beta: float,
                     rng: np.random.Generator) -> int | None:
    """Draw a non-neighbor candidate with probability proportional to
    exp(beta * <v_i, v_j>); None when no candidate exists."""
    pool, probs = latent_probabilities(g, i, beta)
    if len(pool) == 0:
        return None
    idx = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    return int(pool[min(idx, len(pool) - 1)])


def adamic_adar_score(g: Graph, i: int, j: int) -> float:
    """Sum over common neighbors z of 1/ln(deg(z)). Degree-1 nodes cannot be
    common neighbors; they are skipped defensively if they arise."""
    n = g.n_nodes
    common = np.flatnonzero(g._A[i, :n] & g._A[j, :n])
    degs = g.deg[common]
    degs = degs[degs > 1]
    if len(degs) == 0:
        return 0.0
    return float(np.sum(1.0 / np.log(degs)))


def recommend_adamic_adar(g: Graph, i: int, rng: np.random.Generator
                          ) -> int | None:
    """Highest Adamic-Adar candidate among distance2(i); ties broken
    uniformly at random; None when the pool is empty."""
    n = g.n_nodes
    nbrs = np.flatnonzero(g._A[i, :n])
    if len(nbrs) == 0:
        return None
    degs = g.deg[nbrs]
    weights = np.where(degs > 1, 1.0 / np.log(np.maximum(degs, 2)), 0.0)
    scores = weights @ g._A[nbrs, :n]
    scores[i] = 0.0
    scores[g._A[i, :n] == 1] = 0.0
    best = scores.max() if len(scores) else 0.0
    if best <= 0.0:
        # A common neighbor always has degree >= 2, so zero scores
        # everywhere means the distance-2 pool is empty.
        return None
    ties = np.flatnonzero(scores == best)
    return int(ties[rng.integers(len(ties))])


def make_recommender(spec: RecommenderSpec):
    """Bind a spec to a draw function (graph, node, rng) -> candidate."""
    if spec.kind == "fof":
        return recommend_fof
    if spec.kind == "latent":
        beta = spec.beta
        return lambda g, i, rng: recommend_latent(g, i, beta, rng)
    return recommend_adamic_adar
