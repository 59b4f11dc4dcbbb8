"""Alternative graphs from node attribute vectors: k-NN and epsilon-ball constructions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attributes import AttributeMatrix
from .config import TOL
from .errors import CapExceeded, InvalidK, InvalidQuantile
from .graph import Graph

DEFAULT_K = 3
DEFAULT_EPS_QUANTILE = 0.02


def _values(attrs):
    v = attrs.values if isinstance(attrs, AttributeMatrix) else np.asarray(attrs, dtype=np.float64)
    if v.ndim == 1:
        v = v[:, None]
    return v


def distance_matrix(attrs, cap: int = TOL.distance_cap, block_bytes: int = 1 << 26) -> np.ndarray:
    """Pairwise squared Euclidean distances ||f_i - f_j||^2.

    Computed from explicit differences in row blocks rather than the Gram
    expansion, so the result is exactly symmetric with an exact zero diagonal.
    """
    f = _values(attrs)
    n, d = f.shape
    if n > cap:
        raise CapExceeded(f"distance_matrix: N={n} exceeds cap {cap}")
    out = np.empty((n, n))
    rows = max(1, block_bytes // max(1, 8 * n * max(d, 1)))
    for s in range(0, n, rows):
        diff = f[s:s + rows, None, :] - f[None, :, :]
        out[s:s + rows] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def knn_sets(b: np.ndarray, k: int) -> np.ndarray:
    """Row i lists the k nodes j != i with smallest b[i, j], ties to the lowest id."""
    n = b.shape[0]
    if not 1 <= k <= n - 1:
        raise InvalidK(f"k must lie in 1..{n - 1}, got {k}")
    masked = b.astype(np.float64, copy=True)
    np.fill_diagonal(masked, np.inf)
    return np.argsort(masked, axis=1, kind="stable")[:, :k]


def knn_graph(b: np.ndarray, k: int = DEFAULT_K) -> Graph:
    """Edge (i, j) when i is among j's k nearest or j among i's (OR rule)."""
    nn = knn_sets(b, k)
    n = b.shape[0]
    src = np.repeat(np.arange(n), k)
    return Graph.from_edges(n, np.column_stack([src, nn.ravel()]))


def ball_graph(b: np.ndarray, eps: float) -> Graph:
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    i, j = np.nonzero(np.triu(b < eps, k=1))
    return Graph.from_edges(b.shape[0], np.column_stack([i, j]))


def eps_from_quantile(b: np.ndarray, q: float = DEFAULT_EPS_QUANTILE) -> float:
    """Linear-interpolated q-quantile of the off-diagonal distances (unordered pairs)."""
    if not 0 < q < 1:
        raise InvalidQuantile(f"quantile must lie in (0, 1), got {q}")
    iu = np.triu_indices(b.shape[0], k=1)
    if len(iu[0]) == 0:
        raise InvalidQuantile("need at least two nodes to take a distance quantile")
    return float(np.quantile(b[iu], q))


@dataclass
class GraphBundle:
    """Ordered graphs over one node set, e.g. the original graph plus discovered ones."""

    graphs: list
    names: list = field(default_factory=list)

    def __post_init__(self):
        if not self.graphs:
            raise ValueError("a graph bundle needs at least one graph")
        sizes = {g.n_nodes for g in self.graphs}
        if len(sizes) != 1:
            raise ValueError(f"bundle graphs disagree on node count: {sorted(sizes)}")
        if not self.names:
            self.names = [f"graph{r}" for r in range(len(self.graphs))]
        if len(self.names) != len(self.graphs):
            raise ValueError("one name per graph required")

    @property
    def n_nodes(self) -> int:
        return self.graphs[0].n_nodes

    def __len__(self):
        return len(self.graphs)

    def __iter__(self):
        return iter(self.graphs)

    def __getitem__(self, r):
        return self.graphs[r]

    def permute(self, perm) -> "GraphBundle":
        return GraphBundle([g.permute(perm) for g in self.graphs], list(self.names))


def discover(attrs, method: str = "knn", k: int = DEFAULT_K, eps: float | None = None,
             eps_quantile: float = DEFAULT_EPS_QUANTILE) -> Graph:
    b = distance_matrix(attrs)
    if method == "knn":
        return knn_graph(b, k)
    if method == "ball":
        return ball_graph(b, eps if eps is not None else eps_from_quantile(b, eps_quantile))
    raise ValueError(f"unknown discovery method {method!r}")
