"""Per-node structural attributes: seven global (centrality) and seven role-based ones."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .config import TOL
from .errors import ConvergenceError
from .graph import Graph

GLOBAL_NAMES = ("eccentricity", "pagerank", "eigenvector", "betweenness",
                "closeness", "katz", "core_number")
ROLE_NAMES = ("degree", "egonet_edge_sum", "egonet_total_degree", "egonet_internal",
              "egonet_external", "triangle_participation", "scaled_clustering")


@dataclass(frozen=True)
class AttributeMatrix:
    values: np.ndarray
    names: tuple
    standardized: bool = False

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.shape[1] != len(self.names):
            raise ValueError("values must be (N, F) with one name per column")
        if not np.isfinite(self.values).all():
            raise ValueError("attribute values must be finite")

    @property
    def n_nodes(self) -> int:
        return self.values.shape[0]

    def hstack(self, other: "AttributeMatrix") -> "AttributeMatrix":
        return AttributeMatrix(np.hstack([self.values, other.values]),
                               tuple(self.names) + tuple(other.names),
                               self.standardized and other.standardized)


# --- shortest paths -----------------------------------------------------------

def _bfs_batch(adj_t, sources, n):
    """Level-synchronous BFS from several sources at once.

    Returns hop distances (-1 if unreachable) and shortest-path counts, both
    shaped (len(sources), n).
    """
    b = len(sources)
    dist = np.full((b, n), -1, dtype=np.int64)
    sigma = np.zeros((b, n))
    rows = np.arange(b)
    dist[rows, sources] = 0
    sigma[rows, sources] = 1.0
    frontier = np.zeros((b, n), dtype=bool)
    frontier[rows, sources] = True
    depth = 0
    while frontier.any():
        depth += 1
        reach = np.asarray(adj_t.dot(np.where(frontier, sigma, 0.0).T).T)
        new = (reach > 0) & (dist < 0)
        dist[new] = depth
        sigma[new] = reach[new]
        frontier = new
    return dist, sigma


def shortest_path_stats(g: Graph, batch: int = 256):
    """Eccentricity, closeness and betweenness from one sweep of BFS passes.

    Betweenness follows Brandes' dependency accumulation; each unordered pair
    is counted once.
    """
    n = g.n_nodes
    a = g.adjacency()
    adj_t = a.T.tocsr()
    ecc = np.zeros(n)
    close = np.zeros(n)
    between = np.zeros(n)
    for start in range(0, n, batch):
        src = np.arange(start, min(start + batch, n))
        dist, sigma = _bfs_batch(adj_t, src, n)
        reach = dist >= 0
        ecc[src] = dist.max(axis=1)
        n_reach = reach.sum(axis=1) - 1
        total = np.where(reach, dist, 0).sum(axis=1)
        close[src] = np.where(total > 0, n_reach / np.maximum(total, 1), 0.0)
        delta = np.zeros_like(sigma)
        inv_sigma = np.where(reach, 1.0 / np.where(sigma > 0, sigma, 1.0), 0.0)
        for d in range(int(dist.max()), 0, -1):
            coeff = np.where(dist == d, (1.0 + delta) * inv_sigma, 0.0)
            pull = np.asarray(a.dot(coeff.T).T)
            delta += np.where(dist == d - 1, sigma * pull, 0.0)
        delta[np.arange(len(src)), src] = 0.0
        between += delta.sum(axis=0)
    return ecc, close, between / 2.0


# --- spectral centralities ----------------------------------------------------

def pagerank(g: Graph, damping=TOL.pagerank_damping, tol=TOL.power_tol,
             max_iter=TOL.power_max_iter) -> np.ndarray:
    n = g.n_nodes
    if n == 0:
        return np.zeros(0)
    deg = g.degrees().astype(np.float64)
    dangling = deg == 0
    # column-stochastic transition on non-dangling nodes
    p = g.adjacency() @ sp.diags(np.where(dangling, 0.0, 1.0 / np.maximum(deg, 1)))
    x = np.full(n, 1.0 / n)
    for _ in range(max_iter):
        nxt = damping * (p @ x) + (damping * x[dangling].sum() + 1.0 - damping) / n
        if np.abs(nxt - x).sum() < tol:
            return nxt / nxt.sum()
        x = nxt
    raise ConvergenceError(f"PageRank did not converge in {max_iter} iterations")


def _power(op, n, tol, max_iter, what):
    x = np.ones(n) / np.sqrt(n)
    for _ in range(max_iter):
        nxt = op @ x
        nxt /= np.linalg.norm(nxt)
        if np.abs(nxt - x).max() < tol:
            return nxt
        x = nxt
    raise ConvergenceError(f"{what} power iteration did not converge in {max_iter} iterations")


def eigenvector_centrality(g: Graph, tol=TOL.power_tol, max_iter=TOL.power_max_iter):
    """Principal eigenvector of A, l2-normalised, via power iteration on A + I.

    The identity shift keeps the iteration from oscillating on bipartite graphs
    without changing the eigenvectors.
    """
    n = g.n_nodes
    if n == 0:
        return np.zeros(0)
    op = g.adjacency() + sp.identity(n, format="csr")
    return _power(op, n, tol, max_iter, "eigenvector centrality")


def spectral_radius(g: Graph, tol=TOL.power_tol, max_iter=TOL.power_max_iter) -> float:
    if g.n_edges == 0:
        return 0.0
    a = g.adjacency()
    v = _power(a + sp.identity(g.n_nodes, format="csr"), g.n_nodes, tol, max_iter,
               "spectral radius")
    return float(v @ (a @ v))


def katz_centrality(g: Graph, beta=1.0, fraction=TOL.katz_fraction, tol=TOL.power_tol,
                    max_iter=TOL.power_max_iter):
    """Fixed point of x = alpha A x + beta with alpha = fraction / lambda_max(A), l2-normalised."""
    n = g.n_nodes
    if n == 0:
        return np.zeros(0)
    lam = spectral_radius(g, tol, max_iter)
    alpha = fraction / lam if lam > 0 else 0.0
    a = g.adjacency()
    x = np.zeros(n)
    for _ in range(max_iter):
        nxt = alpha * (a @ x) + beta
        if np.abs(nxt - x).max() < tol * max(1.0, np.abs(nxt).max()):
            return nxt / np.linalg.norm(nxt)
        x = nxt
    raise ConvergenceError(f"Katz iteration did not converge in {max_iter} iterations")


def core_number(g: Graph) -> np.ndarray:
    """Bucket-based k-core peeling (Batagelj-Zaversnik)."""
    n = g.n_nodes
    deg = g.degrees().astype(np.int64).copy()
    if n == 0:
        return deg
    max_deg = int(deg.max())
    bins = np.zeros(max_deg + 1, dtype=np.int64)
    np.add.at(bins, deg, 1)
    start = np.concatenate([[0], np.cumsum(bins)[:-1]])
    order = np.argsort(deg, kind="stable")
    pos = np.empty(n, dtype=np.int64)
    pos[order] = np.arange(n)
    bin_start = start.copy()
    indptr, indices = g.indptr, g.indices
    for idx in range(n):
        v = order[idx]
        for u in indices[indptr[v]:indptr[v + 1]]:
            if deg[u] > deg[v]:
                du = deg[u]
                pu = pos[u]
                pw = bin_start[du]
                w = order[pw]
                if u != w:
                    order[pu], order[pw] = w, u
                    pos[u], pos[w] = pw, pu
                bin_start[du] += 1
                deg[u] -= 1
    return deg


def global_attributes(g: Graph) -> AttributeMatrix:
    ecc, close, between = shortest_path_stats(g)
    vals = np.column_stack([
        ecc,
        pagerank(g),
        eigenvector_centrality(g),
        between,
        close,
        katz_centrality(g),
        core_number(g).astype(np.float64),
    ]) if g.n_nodes else np.zeros((0, 7))
    return AttributeMatrix(vals, GLOBAL_NAMES)


def role_attributes(g: Graph) -> AttributeMatrix:
    a = g.adjacency()
    deg = g.degrees().astype(np.float64)
    tri = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel()  # [A^3]_ii
    edge_sum = 2.0 * deg + tri
    total_deg = deg + a @ deg
    has = total_deg > 0
    internal = np.where(has, edge_sum / np.where(has, total_deg, 1.0), 0.0)
    external = np.where(has, 1.0 - internal, 0.0)
    pairs = deg * (deg - 1.0)
    clust = np.where(pairs > 0, 2.0 * tri / np.where(pairs > 0, pairs, 1.0), 0.0)
    vals = np.column_stack([deg, edge_sum, total_deg, internal, external, tri, clust])
    return AttributeMatrix(vals, ROLE_NAMES)


def standardize(attrs: AttributeMatrix) -> AttributeMatrix:
    """Column z-scores with population variance; constant columns become zero."""
    v = attrs.values
    mu = v.mean(axis=0) if len(v) else np.zeros(v.shape[1])
    centered = v - mu
    sd = np.sqrt((centered ** 2).mean(axis=0)) if len(v) else np.ones(v.shape[1])
    scale = np.maximum(np.abs(mu), 1.0)
    const = sd <= TOL.standardize_zero * scale
    out = np.where(const, 0.0, centered / np.where(const, 1.0, sd))
    return AttributeMatrix(out, attrs.names, standardized=True)


def compute_attributes(g: Graph, kind: str = "both", scale: bool = False) -> AttributeMatrix:
    if kind == "global":
        out = global_attributes(g)
    elif kind == "role":
        out = role_attributes(g)
    elif kind == "both":
        out = role_attributes(g).hstack(global_attributes(g))
    else:
        raise ValueError(f"unknown attribute kind {kind!r}")
    return standardize(out) if scale else out
