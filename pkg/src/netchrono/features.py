"""Structural edge features computed from the static final topology.

Each edge gets a 12-dimensional vector: the endpoint mean of five node-level
metrics (degree, clustering, betweenness, PageRank, neighborhood-average
clustering) followed by seven pair-level metrics (common neighbors, two-step
random-walk probability, MST membership, Jaccard, resource allocation,
Adamic-Adar, shortest-path length with the edge removed).  Batches are
z-scored per coordinate within the network.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .netio import TemporalNetwork

__all__ = [
    "NodeMetrics",
    "node_metrics",
    "pair_metrics",
    "edge_embedding",
    "edge_embeddings",
    "standardize",
    "FEATURE_NAMES",
]

FEATURE_NAMES = (
    "degree_mean",
    "clustering_mean",
    "betweenness_mean",
    "pagerank_mean",
    "nbr_clustering_mean",
    "common_neighbors",
    "random_walk_prob",
    "mst_member",
    "jaccard",
    "resource_allocation",
    "adamic_adar",
    "shortest_path_wo_edge",
)


@dataclass(frozen=True)
class NodeMetrics:
    """Per-node structural metric table; arrays indexed by dense node index."""

    degree: np.ndarray
    clustering: np.ndarray
    betweenness: np.ndarray
    pagerank: np.ndarray
    nbr_clustering: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """N x 5 matrix in the layout used by the edge embedding."""
        return np.column_stack(
            [self.degree, self.clustering, self.betweenness, self.pagerank, self.nbr_clustering]
        )


def _clustering(adj: list[set[int]]) -> np.ndarray:
    n = len(adj)
    out = np.zeros(n)
    for v in range(n):
        k = len(adj[v])
        if k < 2:
            continue
        links = 0
        nbrs = adj[v]
        for w in nbrs:
            links += len(nbrs & adj[w])
        out[v] = links / (k * (k - 1))  # each triangle edge counted twice
    return out


def _betweenness(adj: list[set[int]]) -> np.ndarray:
    """Brandes accumulation over BFS shortest-path DAGs, normalized to [0,1]."""
    n = len(adj)
    bc = np.zeros(n)
    for s in range(n):
        stack: list[int] = []
        pred: list[list[int]] = [[] for _ in range(n)]
        sigma = np.zeros(n)
        sigma[s] = 1.0
        dist = np.full(n, -1)
        dist[s] = 0
        q = deque([s])
        while q:
            v = q.popleft()
            stack.append(v)
            for w in adj[v]:
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    q.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    pred[w].append(v)
        delta = np.zeros(n)
        while stack:
            w = stack.pop()
            for v in pred[w]:
                delta[v] += sigma[v] / sigma[w] * (1 + delta[w])
            if w != s:
                bc[w] += delta[w]
    # undirected: every pair visited from both endpoints
    bc /= 2.0
    if n > 2:
        bc /= (n - 1) * (n - 2) / 2.0
    return bc


def _pagerank(adj: list[set[int]], damping=0.85, tol=1e-10, max_iter=200) -> np.ndarray:
    n = len(adj)
    x = np.full(n, 1.0 / n)
    deg = np.array([len(a) for a in adj], dtype=float)
    dangling = deg == 0
    for _ in range(max_iter):
        nxt = np.zeros(n)
        share = np.where(dangling, 0.0, x / np.maximum(deg, 1.0))
        for v in range(n):
            for w in adj[v]:
                nxt[w] += share[v]
        nxt += x[dangling].sum() / n
        nxt = (1 - damping) / n + damping * nxt
        if np.abs(nxt - x).sum() < tol:
            x = nxt
            break
        x = nxt
    return x / x.sum()


def node_metrics(net: TemporalNetwork) -> NodeMetrics:
    if net.n_nodes == 0:
        raise ValueError("empty network")
    adj = net.adjacency()
    degree = np.array([len(a) for a in adj], dtype=float)
    clustering = _clustering(adj)
    nbr_clustering = np.zeros(net.n_nodes)
    for v in range(net.n_nodes):
        if adj[v]:
            nbr_clustering[v] = np.mean([clustering[w] for w in adj[v]])
    return NodeMetrics(
        degree=degree,
        clustering=clustering,
        betweenness=_betweenness(adj),
        pagerank=_pagerank(adj),
        nbr_clustering=nbr_clustering,
    )


def _mst_edges(net: TemporalNetwork) -> set[tuple[int, int]]:
    """Kruskal on unit weights with (min, max) index tie-break."""
    parent = list(range(net.n_nodes))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    chosen: set[tuple[int, int]] = set()
    keys = sorted((min(u, v), max(u, v)) for u, v, _ in net.edges)
    for a, b in keys:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            chosen.add((a, b))
    return chosen


def _sp_without_edge(adj: list[set[int]], u: int, v: int, cap: int) -> int:
    """BFS distance from u to v with edge (u,v) removed; cap when disconnected."""
    dist = {u: 0}
    q = deque([u])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if x == u and y == v:
                continue
            if y not in dist:
                dist[y] = dist[x] + 1
                if y == v:
                    return dist[y]
                q.append(y)
    return cap


def pair_metrics(
    net: TemporalNetwork,
    edge: tuple[int, int],
    adj: list[set[int]] | None = None,
    mst: set[tuple[int, int]] | None = None,
) -> tuple[float, float, float, float, float, float, float]:
    if adj is None:
        adj = net.adjacency()
    if mst is None:
        mst = _mst_edges(net)
    u, v = edge
    if v not in adj[u]:
        raise ValueError(f"({u}, {v}) is not an edge of the network")

    common = adj[u] & adj[v]
    union = adj[u] | adj[v]
    cn = float(len(common))
    du = len(adj[u])
    rw = sum(1.0 / (du * len(adj[w])) for w in common)
    mst_member = 1.0 if (min(u, v), max(u, v)) in mst else 0.0
    jaccard = cn / len(union) if union else 0.0
    ra = sum(1.0 / len(adj[w]) for w in common)
    aa = sum(1.0 / math.log(len(adj[w])) for w in common if len(adj[w]) >= 2)
    sp = float(_sp_without_edge(adj, u, v, cap=net.n_nodes))
    return (cn, rw, mst_member, jaccard, ra, aa, sp)


def edge_embedding(
    net: TemporalNetwork,
    edge: tuple[int, int],
    metrics: NodeMetrics | None = None,
    adj: list[set[int]] | None = None,
    mst: set[tuple[int, int]] | None = None,
) -> np.ndarray:
    """Raw (unstandardized) 12-dim feature vector for one edge."""
    if metrics is None:
        metrics = node_metrics(net)
    u, v = edge
    node_part = 0.5 * (metrics.as_matrix()[u] + metrics.as_matrix()[v])
    return np.concatenate([node_part, pair_metrics(net, edge, adj=adj, mst=mst)])


def standardize(raw: np.ndarray, floor: float = 1e-8):
    """Z-score each column; returns (standardized, mean, std-after-floor)."""
    mean = raw.mean(axis=0)
    std = raw.std(axis=0)
    std = np.maximum(std, floor)
    return (raw - mean) / std, mean, std


def edge_embeddings(net: TemporalNetwork, standardized: bool = True):
    """All-edge feature matrix (M x 12).

    Returns ``(X, mean, std)``; with ``standardized=False`` the mean is zeros
    and the std ones.
    """
    metrics = node_metrics(net)
    adj = net.adjacency()
    mst = _mst_edges(net)
    nm = metrics.as_matrix()
    rows = []
    for u, v, _ in net.edges:
        node_part = 0.5 * (nm[u] + nm[v])
        rows.append(np.concatenate([node_part, pair_metrics(net, (u, v), adj=adj, mst=mst)]))
    raw = np.array(rows)
    if not standardized:
        return raw, np.zeros(raw.shape[1]), np.ones(raw.shape[1])
    return standardize(raw)
