"""Structural metrics: local clustering, degree Gini, group homophily, and
mediated/bichromatic edge statistics.

Zero-denominator cases yield NaN (serialized as an empty CSV cell), never a
silent 0, so trajectory averages are not corrupted.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph, Provenance

UNDEFINED = float("nan")


def clustering_coefficient(g: Graph, u: int) -> float:
    """2 * (edges among neighbors) / (d * (d - 1)); 0 when degree < 2."""
    d = g.degree(u)
    if d < 2:
        return 0.0
    return 2.0 * float(g.tri[u]) / (d * (d - 1))


def _clustering_values(g: Graph, ids: np.ndarray) -> np.ndarray:
    d = g.deg[ids].astype(np.float64)
    tri = g.tri[ids].astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.where(d >= 2, 2.0 * tri / (d * np.maximum(d - 1.0, 1.0)), 0.0)
    return c


def average_clustering(g: Graph, ids=None) -> float:
    """Mean local clustering over the given alive node ids (default: all).
    NaN on an empty set."""
    if ids is None:
        ids = g.alive_ids()
    ids = np.asarray(ids, dtype=np.int64)
    if len(ids) == 0:
        return UNDEFINED
    return float(np.mean(_clustering_values(g, ids)))


def transitivity(g: Graph, ids=None) -> float:
    """Triangle density 3*triangles / connected triples (the alternative
    reading of "global clustering"). NaN when no node has degree >= 2."""
    if ids is None:
        ids = g.alive_ids()
    ids = np.asarray(ids, dtype=np.int64)
    if len(ids) == 0:
        return UNDEFINED
    d = g.deg[ids].astype(np.float64)
    triples = float(np.sum(d * (d - 1.0) / 2.0))
    if triples == 0:
        return UNDEFINED
    closed = float(np.sum(g.tri[ids]))  # = 3 * triangles through these nodes
    return closed / triples


def gini(degrees) -> float:
    """Gini coefficient of a degree list (1-based ascending-rank formula).
    NaN when every degree is zero or the list is empty."""
    d = np.sort(np.asarray(degrees, dtype=np.float64))
    n = len(d)
    total = d.sum()
    if n == 0 or total == 0:
        return UNDEFINED
    ranks = np.arange(1, n + 1, dtype=np.float64)
    return float(2.0 * np.sum(ranks * d) / (n * total) - (n + 1) / n)


def homophily(g: Graph, group: int) -> float:
    """|E_gg| / |E_g| - n_g / n over alive nodes and edges; NaN when the
    group touches no edges."""
    pair = g.pair_counts_org + g.pair_counts_algo
    e_g = int(pair[group].sum())
    if e_g == 0 or g.n_alive == 0:
        return UNDEFINED
    e_gg = int(pair[group, group])
    return e_gg / e_g - int(g.alive_per_group[group]) / g.n_alive


def edge_fractions(g: Graph) -> tuple[float, float, float]:
    """(mediated share of alive friend edges, bichromatic share of mediated
    friend edges, bichromatic share of unmediated friend edges)."""
    n_med = g.prov_counts[Provenance.FRIEND_MEDIATED]
    n_unm = g.prov_counts[Provenance.FRIEND_UNMEDIATED]
    total = n_med + n_unm
    med_frac = n_med / total if total else UNDEFINED
    bi_med = (g.bichromatic_counts[Provenance.FRIEND_MEDIATED] / n_med
              if n_med else UNDEFINED)
    bi_unm = (g.bichromatic_counts[Provenance.FRIEND_UNMEDIATED] / n_unm
              if n_unm else UNDEFINED)
    return med_frac, bi_med, bi_unm


def snapshot_metrics(g: Graph, t: int) -> dict[str, float]:
    """One trajectory row: every structural metric of the alive subgraph.

    With no alive edges (or fewer than two alive nodes) every metric field
    is NaN except the population counts, matching the undefined-marker
    policy.
    """
    row: dict[str, float] = {"t": float(t), "n_alive": float(g.n_alive)}
    names_group = [f"_group_{k}" for k in range(g.n_groups)]
    degenerate = g.n_alive < 2 or g.edge_count == 0
    if degenerate:
        for name in ("avg_degree", "clustering_global", "transitivity_global",
                     "gini_global", "homophily", "mediated_fraction",
                     "bichromatic_mediated", "bichromatic_unmediated"):
            row[name] = UNDEFINED
        for k in range(g.n_groups):
            row[f"clustering{names_group[k]}"] = UNDEFINED
            row[f"gini{names_group[k]}"] = UNDEFINED
            row[f"homophily{names_group[k]}"] = UNDEFINED
    else:
        ids = g.alive_ids()
        groups = g.group[ids]
        degs = g.deg[ids]
        cvals = _clustering_values(g, ids)
        row["avg_degree"] = 2.0 * g.edge_count / g.n_alive
        row["clustering_global"] = float(np.mean(cvals))
        row["transitivity_global"] = transitivity(g, ids)
        row["gini_global"] = gini(degs)
        homs = []
        for k in range(g.n_groups):
            in_k = groups == k
            row[f"clustering{names_group[k]}"] = (
                float(np.mean(cvals[in_k])) if in_k.any() else UNDEFINED)
            row[f"gini{names_group[k]}"] = (
                gini(degs[in_k]) if in_k.any() else UNDEFINED)
            h = homophily(g, k)
            row[f"homophily{names_group[k]}"] = h
            if not np.isnan(h):
                homs.append(h)
        row["homophily"] = float(np.mean(homs)) if homs else UNDEFINED
        med, bi_m, bi_u = edge_fractions(g)
        row["mediated_fraction"] = med
        row["bichromatic_mediated"] = bi_m
        row["bichromatic_unmediated"] = bi_u
    for prov in Provenance:
        row[f"edges_{prov.value}"] = float(g.prov_counts[prov])
    return row
