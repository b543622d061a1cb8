"""Provenance-aware dynamic undirected graph with an append-only event ledger.

The graph grows by node arrivals and edge formation and shrinks by node
departures. Every edge carries a provenance tag describing how it formed,
and every mutation is appended to a ledger so that the adjacency can be
reconstructed or audited after a run. Structure queries (neighbors of
neighbors, common-neighbor counts) are backed by dense uint8 adjacency
matrices so that per-step simulation loops stay cheap even on graphs with
hundreds of thousands of edges.

Node ids are dense nonnegative integers, assigned once and never reused.
Dead nodes stay in the node table (for ledger analysis) but drop out of
adjacency, candidate pools, and metrics.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

import numpy as np


class Provenance(Enum):
    """How an edge came to exist."""

    INITIAL = "initial"
    STRANGER = "stranger"
    FRIEND_UNMEDIATED = "friend_unmediated"
    FRIEND_MEDIATED = "friend_mediated"
    ALGORITHMIC = "algorithmic"


#: Every provenance an edge can carry.
ALL_PROVENANCES = frozenset(Provenance)

#: Edges not created by the recommender. FRIEND_MEDIATED counts as organic:
#: the mediation label records how the candidate became reachable, not who
#: created the edge.
ORGANIC = frozenset(p for p in Provenance if p is not Provenance.ALGORITHMIC)

#: Removal reason tags recorded in the ledger.
REASON_NODE_DEPARTURE = "node_departure"
REASON_REWIRE = "rewire"


class GraphError(RuntimeError):
    """Logic error: operating on unknown, dead, or self-loop endpoints."""


class DimensionError(ValueError):
    """Configuration error: embedding dimension mismatch."""


@dataclass(frozen=True)
class Node:
    """Read-only view of one node."""

    id: int
    group: int
    embedding: np.ndarray
    birth_time: int
    alive: bool


EdgeFilter = "frozenset[Provenance] | Callable[[Provenance], bool] | None"


def _as_provenance_set(edge_filter: EdgeFilter) -> frozenset:
    if edge_filter is None:
        return ALL_PROVENANCES
    if callable(edge_filter):
        return frozenset(p for p in Provenance if edge_filter(p))
    return frozenset(edge_filter)


class Graph:
    """Dynamic undirected simple graph with per-edge provenance.

    Parameters
    ----------
    emb_dim:
        Dimension of node embeddings; enforced on every `add_node`.
    n_groups:
        Number of distinct group labels; group ids must lie in [0, n_groups).
    capacity:
        Initial array capacity (grows automatically).
    track_arms:
        Maintain per-arm structure (induced degrees/triangles and cross-arm
        edge tallies) for A/B evaluation runs.
    """

    def __init__(self, emb_dim: int, n_groups: int, capacity: int = 256,
                 track_arms: bool = False):
        if emb_dim < 1 or n_groups < 1:
            raise ValueError("emb_dim and n_groups must be positive")
        self.emb_dim = emb_dim
        self.n_groups = n_groups
        self.track_arms = track_arms
        self._cap = max(16, capacity)
        self._n = 0  # next id == number of ids ever issued

        c = self._cap
        self._A = np.zeros((c, c), dtype=np.uint8)       # all alive edges
        self._A_org = np.zeros((c, c), dtype=np.uint8)   # non-algorithmic only
        self.group = np.zeros(c, dtype=np.int16)
        self.birth = np.zeros(c, dtype=np.int32)
        self.alive = np.zeros(c, dtype=bool)
        self.emb = np.zeros((c, emb_dim), dtype=np.float64)
        self.deg = np.zeros(c, dtype=np.int64)
        self.deg_org = np.zeros(c, dtype=np.int64)       # degree over organic edges
        self.tri = np.zeros(c, dtype=np.int64)           # edges among neighbors
        self.arm = np.full(c, -1, dtype=np.int8)         # -1 unassigned, 0 control, 1 treatment
        self.deg_arm = np.zeros(c, dtype=np.int64)       # degree within own arm
        self.tri_arm = np.zeros(c, dtype=np.int64)       # edges among same-arm neighbors

        # neighbor id -> (provenance, created_at); insertion-ordered
        self._adj: list[dict[int, tuple[Provenance, int]]] = []

        self.n_alive = 0
        self.alive_per_group = np.zeros(n_groups, dtype=np.int64)
        self.edge_count = 0
        self.prov_counts = {p: 0 for p in Provenance}            # alive edges
        self.bichromatic_counts = {p: 0 for p in Provenance}     # alive bichromatic edges
        # pair_counts[g1, g2] = alive edges between groups g1 and g2 (symmetric,
        # monochromatic counted once on the diagonal), split by organic/algorithmic
        self.pair_counts_org = np.zeros((n_groups, n_groups), dtype=np.int64)
        self.pair_counts_algo = np.zeros((n_groups, n_groups), dtype=np.int64)
        # algorithmic edges whose endpoints sit in different A/B arms
        self.pair_counts_algo_cross_arm = np.zeros((n_groups, n_groups), dtype=np.int64)

        self.ledger: list[tuple] = []
        self._alive_ids_cache: np.ndarray | None = None

    # -- capacity -----------------------------------------------------------

    def _grow(self, need: int) -> None:
        new_cap = self._cap
        while new_cap < need:
            new_cap *= 2
        A = np.zeros((new_cap, new_cap), dtype=np.uint8)
        A[: self._cap, : self._cap] = self._A
        self._A = A
        A = np.zeros((new_cap, new_cap), dtype=np.uint8)
        A[: self._cap, : self._cap] = self._A_org
        self._A_org = A
        for name in ("group", "birth", "alive", "deg", "deg_org", "tri",
                     "arm", "deg_arm", "tri_arm"):
            old = getattr(self, name)
            new = np.zeros(new_cap, dtype=old.dtype)
            if name == "arm":
                new[:] = -1
            new[: self._cap] = old
            setattr(self, name, new)
        emb = np.zeros((new_cap, self.emb_dim), dtype=np.float64)
        emb[: self._cap] = self.emb
        self.emb = emb
        self._cap = new_cap

    # -- basic accessors ----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        """Total ids ever issued (alive and dead)."""
        return self._n

    def node(self, u: int) -> Node:
        self._check_known(u)
        return Node(u, int(self.group[u]), self.emb[u].copy(),
                    int(self.birth[u]), bool(self.alive[u]))

    def neighbors(self, u: int) -> list[int]:
        self._check_known(u)
        return list(self._adj[u].keys())

    def edge_provenance(self, u: int, v: int) -> Provenance | None:
        info = self._adj[u].get(v)
        return None if info is None else info[0]

    def degree(self, u: int) -> int:
        self._check_known(u)
        return int(self.deg[u])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj[u]

    def alive_ids(self) -> np.ndarray:
        """Ids of alive nodes, ascending. Cached until membership changes."""
        if self._alive_ids_cache is None:
            self._alive_ids_cache = np.flatnonzero(self.alive[: self._n])
        return self._alive_ids_cache

    def _check_known(self, u: int) -> None:
        if not 0 <= u < self._n:
            raise GraphError(f"unknown node id {u}")

    def _check_alive(self, u: int) -> None:
        self._check_known(u)
        if not self.alive[u]:
            raise GraphError(f"node {u} is not alive")

    # -- mutation -----------------------------------------------------------

    def add_node(self, group: int, embedding, t: int) -> int:
        embedding = np.asarray(embedding, dtype=np.float64)
        if embedding.shape != (self.emb_dim,):
            raise DimensionError(
                f"embedding has shape {embedding.shape}, expected ({self.emb_dim},)")
        if not 0 <= group < self.n_groups:
            raise ValueError(f"group {group} out of range [0, {self.n_groups})")
        u = self._n
        if u >= self._cap:
            self._grow(u + 1)
        self._n += 1
        self.group[u] = group
        self.birth[u] = t
        self.alive[u] = True
        self.emb[u] = embedding
        self._adj.append({})
        self.n_alive += 1
        self.alive_per_group[group] += 1
        self.ledger.append(("node_added", u, group, t))
        self._alive_ids_cache = None
        return u

    def set_arm(self, u: int, arm: int) -> None:
        self._check_alive(u)
        self.arm[u] = arm

    def rebuild_arm_stats(self) -> None:
        """Recompute arm-induced degrees/triangles after assigning arms to
        nodes that already have edges (the initial graph)."""
        n = self._n
        self.deg_arm[:] = 0
        self.tri_arm[:] = 0
        self.pair_counts_algo_cross_arm[:] = 0
        for u in range(n):
            if not self.alive[u]:
                continue
            a = self.arm[u]
            if a < 0:
                continue
            for v, (prov, _) in self._adj[u].items():
                if v < u:
                    continue
                if self.arm[v] == a:
                    self.deg_arm[u] += 1
                    self.deg_arm[v] += 1
                    common = np.flatnonzero(self._A[u, :n] & self._A[v, :n])
                    same = common[self.arm[common] == a]
                    self.tri_arm[u] += len(same)
                    self.tri_arm[v] += len(same)
                    self.tri_arm[same] += 1
                elif prov is Provenance.ALGORITHMIC and self.arm[v] >= 0:
                    self._bump_pair(self.pair_counts_algo_cross_arm, u, v, 1)

    def _bump_pair(self, mat: np.ndarray, u: int, v: int, delta: int) -> None:
        gu, gv = self.group[u], self.group[v]
        mat[gu, gv] += delta
        if gu != gv:
            mat[gv, gu] += delta

    def add_edge(self, u: int, v: int, prov: Provenance, t: int) -> bool:
        """Insert edge u-v. Returns False (no mutation) if it already exists."""
        if u == v:
            raise GraphError(f"self-loop on node {u}")
        self._check_alive(u)
        self._check_alive(v)
        if v in self._adj[u]:
            return False
        n = self._n
        common = np.flatnonzero(self._A[u, :n] & self._A[v, :n])
        c = len(common)
        self.tri[u] += c
        self.tri[v] += c
        self.tri[common] += 1
        if self.track_arms and self.arm[u] >= 0 and self.arm[u] == self.arm[v]:
            same = common[self.arm[common] == self.arm[u]]
            self.tri_arm[u] += len(same)
            self.tri_arm[v] += len(same)
            self.tri_arm[same] += 1
            self.deg_arm[u] += 1
            self.deg_arm[v] += 1

        self._adj[u][v] = (prov, t)
        self._adj[v][u] = (prov, t)
        self._A[u, v] = self._A[v, u] = 1
        organic = prov is not Provenance.ALGORITHMIC
        if organic:
            self._A_org[u, v] = self._A_org[v, u] = 1
            self.deg_org[u] += 1
            self.deg_org[v] += 1
            self._bump_pair(self.pair_counts_org, u, v, 1)
        else:
            self._bump_pair(self.pair_counts_algo, u, v, 1)
            if self.track_arms and self.arm[u] >= 0 and self.arm[v] >= 0 \
                    and self.arm[u] != self.arm[v]:
                self._bump_pair(self.pair_counts_algo_cross_arm, u, v, 1)
        self.deg[u] += 1
        self.deg[v] += 1
        self.edge_count += 1
        self.prov_counts[prov] += 1
        if self.group[u] != self.group[v]:
            self.bichromatic_counts[prov] += 1
        self.ledger.append(("edge_added", min(u, v), max(u, v), prov.value, t))
        return True

    def remove_edge(self, u: int, v: int, t: int,
                    reason: str = REASON_NODE_DEPARTURE) -> None:
        info = self._adj[u].get(v)
        if info is None:
            raise GraphError(f"edge {u}-{v} does not exist")
        prov, _ = info
        n = self._n
        del self._adj[u][v]
        del self._adj[v][u]
        self._A[u, v] = self._A[v, u] = 0
        common = np.flatnonzero(self._A[u, :n] & self._A[v, :n])
        c = len(common)
        self.tri[u] -= c
        self.tri[v] -= c
        self.tri[common] -= 1
        if self.track_arms and self.arm[u] >= 0 and self.arm[u] == self.arm[v]:
            same = common[self.arm[common] == self.arm[u]]
            self.tri_arm[u] -= len(same)
            self.tri_arm[v] -= len(same)
            self.tri_arm[same] -= 1
            self.deg_arm[u] -= 1
            self.deg_arm[v] -= 1
        organic = prov is not Provenance.ALGORITHMIC
        if organic:
            self._A_org[u, v] = self._A_org[v, u] = 0
            self.deg_org[u] -= 1
            self.deg_org[v] -= 1
            self._bump_pair(self.pair_counts_org, u, v, -1)
        else:
            self._bump_pair(self.pair_counts_algo, u, v, -1)
            if self.track_arms and self.arm[u] >= 0 and self.arm[v] >= 0 \
                    and self.arm[u] != self.arm[v]:
                self._bump_pair(self.pair_counts_algo_cross_arm, u, v, -1)
        self.deg[u] -= 1
        self.deg[v] -= 1
        self.edge_count -= 1
        self.prov_counts[prov] -= 1
        if self.group[u] != self.group[v]:
            self.bichromatic_counts[prov] -= 1
        self.ledger.append(("edge_removed", min(u, v), max(u, v), reason, t))

    def remove_node(self, u: int, t: int) -> int:
        """Mark u dead and drop its incident edges. Returns edges removed."""
        self._check_alive(u)
        nbrs = list(self._adj[u].keys())
        for v in nbrs:
            self.remove_edge(u, v, t, reason=REASON_NODE_DEPARTURE)
        self.alive[u] = False
        self.n_alive -= 1
        self.alive_per_group[self.group[u]] -= 1
        self.ledger.append(("node_removed", u, t))
        self._alive_ids_cache = None
        return len(nbrs)

    # -- structure queries --------------------------------------------------

    def distance2(self, u: int, edge_filter: EdgeFilter = None) -> np.ndarray:
        """Nodes exactly two filtered hops from u.

        Returns every alive w (ascending) such that a path u-x-w exists whose
        two edges both pass `edge_filter`, excluding u itself and u's direct
        neighbors under the FULL edge set (a filtered 2-path to an existing
        friend must not re-propose the edge).
        """
        self._check_known(u)
        allowed = _as_provenance_set(edge_filter)
        n = self._n
        if allowed == ALL_PROVENANCES:
            mat = self._A
        elif allowed == ORGANIC:
            mat = self._A_org
        else:
            return self._distance2_slow(u, allowed)
        nbrs = np.flatnonzero(mat[u, :n])
        if len(nbrs) == 0:
            return nbrs
        reach = np.bitwise_or.reduce(mat[nbrs, :n], axis=0)
        reach[self._A[u, :n] == 1] = 0
        reach[u] = 0
        return np.flatnonzero(reach)

    def _distance2_slow(self, u: int, allowed: frozenset) -> np.ndarray:
        out: set[int] = set()
        for x, (p1, _) in self._adj[u].items():
            if p1 not in allowed:
                continue
            for w, (p2, _) in self._adj[x].items():
                if p2 in allowed:
                    out.add(w)
        out.discard(u)
        out.difference_update(self._adj[u].keys())
        return np.array(sorted(out), dtype=np.int64)

    def has_two_path(self, u: int, w: int, organic_only: bool = False) -> bool:
        """True if some x links both u and w (restricted to organic edges
        on both hops when `organic_only`)."""
        n = self._n
        mat = self._A_org if organic_only else self._A
        return bool(np.count_nonzero(mat[u, :n] & mat[w, :n]))

    def degree_sequence(self, predicate: Callable[[Node], bool] | None = None
                        ) -> list[int]:
        """Degrees of alive nodes matching `predicate`, sorted ascending."""
        ids = self.alive_ids()
        if predicate is not None:
            ids = [u for u in ids if predicate(self.node(int(u)))]
        return sorted(int(self.deg[u]) for u in ids)

    # -- snapshot export ----------------------------------------------------

    def iter_alive_edges(self) -> Iterable[tuple[int, int, Provenance, int]]:
        """Alive edges as (u, v, provenance, created_at), u < v, ascending."""
        for u in range(self._n):
            for v, (prov, t) in self._adj[u].items():
                if u < v:
                    yield u, v, prov, t

    def save_snapshot(self, edges_path, nodes_path) -> None:
        """Write edge-list and node-table CSV files."""
        with open(edges_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("u,v,provenance,created_at\n")
            for u, v, prov, t in self.iter_alive_edges():
                fh.write(f"{u},{v},{prov.value},{t}\n")
        emb_cols = ",".join(f"emb_{k}" for k in range(self.emb_dim))
        with open(nodes_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(f"id,group,{emb_cols},birth_time,alive\n")
            for u in range(self._n):
                emb = ",".join(f"{x:.12g}" for x in self.emb[u])
                fh.write(f"{u},{self.group[u]},{emb},{self.birth[u]},"
                         f"{int(self.alive[u])}\n")
