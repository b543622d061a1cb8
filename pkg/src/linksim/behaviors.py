"""Acceptance behavior for recommended links, with optional rewiring.

A recommended edge is accepted either with a constant probability or with
the same calibrated sigmoid used in the stranger phase (choice homophily).
Under rewiring, each accepted recommendation removes one existing edge so
the accepting node's degree is conserved.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import link_probability
from .graph import Graph, Provenance, REASON_REWIRE

ACCEPT_CONSTANT = "constant"
ACCEPT_CHOICE_HOMOPHILY = "choice_homophily"

REWIRE_SCOPE_NODE = "node"
REWIRE_SCOPE_GRAPH = "graph"


@dataclass(frozen=True)
class BehaviorSpec:
    acceptance: str = ACCEPT_CONSTANT
    p: float = 0.5
    rewire: bool = False
    rewire_scope: str = REWIRE_SCOPE_NODE

    def __post_init__(self):
        if self.acceptance not in (ACCEPT_CONSTANT, ACCEPT_CHOICE_HOMOPHILY):
            raise ValueError(f"unknown acceptance model {self.acceptance!r}")
        if not 0 <= self.p <= 1:
            raise ValueError("acceptance probability must lie in [0, 1]")
        if self.rewire_scope not in (REWIRE_SCOPE_NODE, REWIRE_SCOPE_GRAPH):
            raise ValueError(f"unknown rewire scope {self.rewire_scope!r}")


def decide(spec: BehaviorSpec, emb_i, emb_j, a: float, b: float,
           rng: np.random.Generator) -> bool:
    """Accept/reject a recommended link between nodes with the given
    embeddings. Choice homophily reuses the calibrated linkage sigmoid."""
    if spec.acceptance == ACCEPT_CONSTANT:
        p = spec.p
    else:
        p = link_probability(emb_i, emb_j, a, b)
    return bool(rng.random() < p)


def _uniform_alive_edge(g: Graph, exclude: tuple[int, int],
                        rng: np.random.Generator) -> tuple[int, int] | None:
    """Uniform draw over alive edges except `exclude`, via half-edges
    (each edge owns exactly two)."""
    if g.edge_count <= 1:
        return None
    ids = g.alive_ids()
    degs = g.deg[ids]
    cum = np.cumsum(degs)
    for _ in range(64):
        r = rng.integers(cum[-1])
        u = int(ids[np.searchsorted(cum, r, side="right")])
        nbrs = g.neighbors(u)
        v = nbrs[rng.integers(len(nbrs))]
        if (min(u, v), max(u, v)) != (min(exclude), max(exclude)):
            return u, v
    return None


def apply_acceptance(g: Graph, i: int, j: int, rewire: bool, t: int,
                     rng: np.random.Generator,
                     rewire_scope: str = REWIRE_SCOPE_NODE
                     ) -> tuple[bool, tuple[int, int] | None]:
    """Realize an accepted recommendation i-j as an ALGORITHMIC edge.

    With rewiring, one existing edge is then removed: by default a uniform
    edge incident to the accepting node i (never the just-added one), or a
    uniform edge anywhere in the graph under the `graph` scope. Returns
    (edge_added, removed_edge_or_None).
    """
    added = g.add_edge(i, j, Provenance.ALGORITHMIC, t)
    if not added or not rewire:
        return added, None
    if rewire_scope == REWIRE_SCOPE_NODE:
        others = [w for w in g.neighbors(i) if w != j]
        if not others:
            return added, None
        w = others[int(rng.integers(len(others)))]
        g.remove_edge(i, w, t, reason=REASON_REWIRE)
        return added, (i, w)
    victim = _uniform_alive_edge(g, exclude=(i, j), rng=rng)
    if victim is None:
        return added, None
    g.remove_edge(victim[0], victim[1], t, reason=REASON_REWIRE)
    return added, victim
