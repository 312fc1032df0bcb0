"""Temporal network representation, edge-list I/O, sampling, and order labels.

A temporal network is an undirected simple graph whose every edge carries a
real-valued generation timestamp (or an integer snapshot index).  Node
identifiers in files are opaque strings; they are mapped to dense integer
indices at parse time and the mapping travels with the network.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "TemporalNetwork",
    "NormalizedOrder",
    "ParseError",
    "parse_edge_list",
    "write_edge_list",
    "distinguishable_pairs",
    "sample_subnetwork",
    "normalized_positions",
    "network_stats",
]


class ParseError(ValueError):
    """Raised for malformed edge-list input; carries the offending line number."""


@dataclass(frozen=True)
class TemporalNetwork:
    """Immutable undirected temporal network.

    ``node_ids`` maps dense index -> original string identifier.
    ``edges`` is an ordered tuple of ``(u, v, t)`` with ``u``/``v`` dense
    indices and ``t`` a finite float.  No self-loops, no duplicate
    undirected pairs.
    """

    node_ids: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = len(self.node_ids)
        seen = set()
        for u, v, t in self.edges:
            if u == v:
                raise ValueError(f"self-loop on node {self.node_ids[u]!r}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge endpoint out of range: ({u}, {v})")
            if not math.isfinite(t):
                raise ValueError(f"non-finite timestamp on edge ({u}, {v})")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(
                    f"duplicate undirected edge "
                    f"({self.node_ids[key[0]]!r}, {self.node_ids[key[1]]!r})"
                )
            seen.add(key)

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def timestamps(self) -> np.ndarray:
        return np.array([t for _, _, t in self.edges], dtype=float)

    def adjacency(self) -> list[set[int]]:
        """Neighbor sets indexed by dense node index."""
        adj: list[set[int]] = [set() for _ in range(self.n_nodes)]
        for u, v, _ in self.edges:
            adj[u].add(v)
            adj[v].add(u)
        return adj

    def snapshot_count(self) -> int:
        return len({t for _, _, t in self.edges})


@dataclass(frozen=True)
class NormalizedOrder:
    """Per-edge normalized generation positions, values in (0, 1]."""

    alpha: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=float)
        if a.ndim != 1 or a.size == 0:
            raise ValueError("alpha must be a non-empty 1-d array")
        if np.any(a <= 0) or np.any(a > 1):
            raise ValueError("alpha values must lie in (0, 1]")
        object.__setattr__(self, "alpha", a)


def parse_edge_list(text: str) -> TemporalNetwork:
    """Parse a tab-separated ``u v t`` document into a TemporalNetwork.

    ``#``-prefixed lines and blank lines are skipped.  Duplicate undirected
    pairs keep the earliest timestamp; self-loops are rejected.
    """
    index: dict[str, int] = {}
    node_ids: list[str] = []
    order: list[tuple[int, int]] = []
    best_t: dict[tuple[int, int], float] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'u<TAB>v<TAB>t', got {raw!r}")
        us, vs, ts = parts
        try:
            t = float(ts)
        except ValueError:
            raise ParseError(f"line {lineno}: bad timestamp {ts!r}") from None
        if not math.isfinite(t):
            raise ParseError(f"line {lineno}: non-finite timestamp {ts!r}")
        if us == vs:
            raise ParseError(f"line {lineno}: self-loop on node {us!r}")
        for s in (us, vs):
            if s not in index:
                index[s] = len(node_ids)
                node_ids.append(s)
        u, v = index[us], index[vs]
        key = (u, v) if u < v else (v, u)
        if key in best_t:
            best_t[key] = min(best_t[key], t)
        else:
            best_t[key] = t
            order.append(key)

    edges = tuple((u, v, best_t[(u, v)]) for u, v in order)
    return TemporalNetwork(tuple(node_ids), edges)


def _format_time(t: float) -> str:
    if float(t).is_integer():
        return str(int(t))
    return repr(float(t))


def write_edge_list(net: TemporalNetwork) -> str:
    """Render the canonical edge-list text: lines sorted by (t, u, v)."""
    rows = []
    for u, v, t in net.edges:
        a, b = sorted((net.node_ids[u], net.node_ids[v]))
        rows.append((t, a, b))
    rows.sort()
    return "".join(f"{a}\t{b}\t{_format_time(t)}\n" for t, a, b in rows)


def distinguishable_pairs(net: TemporalNetwork) -> tuple[int, float]:
    """Count unordered edge pairs with strictly different timestamps.

    Returns ``(E_d, P_Ed)`` where ``P_Ed = E_d / C(M, 2)``.
    """
    m = net.n_edges
    if m < 2:
        raise ValueError("need at least 2 edges to form a pair")
    total = m * (m - 1) // 2
    counts: dict[float, int] = {}
    for _, _, t in net.edges:
        counts[t] = counts.get(t, 0) + 1
    tied = sum(c * (c - 1) // 2 for c in counts.values())
    e_d = total - tied
    return e_d, e_d / total


def sample_subnetwork(net: TemporalNetwork, fraction: float, seed: int) -> TemporalNetwork:
    """Uniformly sample ``ceil(fraction * M)`` edges without replacement.

    The node set shrinks to the endpoints of retained edges (isolated nodes
    are dropped); timestamps are kept.  Deterministic given ``seed``.
    """
    if not 0.5 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0.5, 1.0], got {fraction}")
    m = net.n_edges
    keep = math.ceil(fraction * m)
    if keep < 2:
        raise ValueError("fraction * M must be at least 2")
    rng = np.random.default_rng(seed)
    chosen = sorted(rng.choice(m, size=keep, replace=False))
    picked = [net.edges[i] for i in chosen]

    used = sorted({u for u, _, _ in picked} | {v for _, v, _ in picked})
    remap = {old: new for new, old in enumerate(used)}
    node_ids = tuple(net.node_ids[i] for i in used)
    edges = tuple((remap[u], remap[v], t) for u, v, t in picked)
    return TemporalNetwork(node_ids, edges)


def normalized_positions(net: TemporalNetwork) -> NormalizedOrder:
    """Rank edges by timestamp (mean rank on ties) and normalize by M."""
    if net.n_edges < 1:
        raise ValueError("network has no edges")
    t = net.timestamps()
    ranks = rankdata(t, method="average")
    return NormalizedOrder(ranks / net.n_edges)


def network_stats(net: TemporalNetwork) -> dict:
    """The summary statistics reported per dataset: N, M, E_d, P_Ed, S."""
    e_d, p_ed = distinguishable_pairs(net)
    return {
        "N": net.n_nodes,
        "M": net.n_edges,
        "E_d": e_d,
        "P_Ed": p_ed,
        "S": net.snapshot_count(),
    }


def stats_json(net: TemporalNetwork) -> str:
    return json.dumps(network_stats(net), sort_keys=True)
