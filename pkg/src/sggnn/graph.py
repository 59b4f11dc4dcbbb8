"""Undirected graphs in CSR form and the normalized operators built from them."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .config import TOL
from .errors import CapExceeded, ParseError


def _frozen(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph with sorted CSR adjacency.

    Both directions of every edge are stored; self-loops and parallel edges
    are never stored. Build instances with :meth:`from_edges`.
    """

    n_nodes: int
    indptr: np.ndarray
    indices: np.ndarray

    @classmethod
    def from_edges(cls, n_nodes, edges) -> "Graph":
        n = int(n_nodes)
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if e.size and (e.min() < 0 or e.max() >= n):
            raise ValueError(f"edge endpoint out of range for n_nodes={n}")
        e = e[e[:, 0] != e[:, 1]]
        both = np.concatenate([e, e[:, ::-1]])
        if both.size:
            # sort by (row, col) then drop duplicates
            key = both[:, 0] * n + both[:, 1]
            key = np.unique(key)
            rows, cols = key // n, key % n
        else:
            rows = cols = np.zeros(0, dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, _frozen(indptr), _frozen(cols.astype(np.int64)))

    @classmethod
    def empty(cls, n_nodes) -> "Graph":
        return cls.from_edges(n_nodes, np.zeros((0, 2), dtype=np.int64))

    @classmethod
    def from_adjacency(cls, a) -> "Graph":
        a = sp.coo_matrix(a)
        return cls.from_edges(a.shape[0], np.column_stack([a.row, a.col])[a.data != 0])

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edges(self) -> np.ndarray:
        """Unordered edges as an (|E|, 2) array with i < j, lexicographically sorted."""
        rows = np.repeat(np.arange(self.n_nodes), self.degrees())
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices))
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n_nodes,) * 2)

    def dense(self) -> np.ndarray:
        return self.adjacency().toarray()

    def permute(self, perm) -> "Graph":
        """Relabel node ``i`` as ``perm[i]``."""
        perm = np.asarray(perm)
        return Graph.from_edges(self.n_nodes, perm[self.edges()])

    def edge_set(self) -> set:
        return {(int(i), int(j)) for i, j in self.edges()}

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (self.n_nodes == other.n_nodes
                and np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    def __hash__(self):
        return hash((self.n_nodes, self.indices.tobytes()))

    def __repr__(self):
        return f"Graph(n_nodes={self.n_nodes}, n_edges={self.n_edges})"


def _self_loop_degrees(g):
    return g.degrees().astype(np.float64) + 1.0


def normalize_sym(g: Graph) -> sp.csr_matrix:
    """D^{-1/2} (A + I) D^{-1/2} with D the degree matrix of A + I."""
    d = 1.0 / np.sqrt(_self_loop_degrees(g))
    a = (g.adjacency() + sp.identity(g.n_nodes, format="csr")).tocsr()
    a.sort_indices()
    return sp.csr_matrix(sp.diags(d) @ a @ sp.diags(d))


def normalize_rw(g: Graph) -> sp.csr_matrix:
    """D^{-1} (A + I); each row sums to one."""
    d = _self_loop_degrees(g)
    a = (g.adjacency() + sp.identity(g.n_nodes, format="csr")).tocsr()
    a.sort_indices()
    return sp.csr_matrix(sp.diags(1.0 / d) @ a)


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def fourier(self, x) -> np.ndarray:
        return self.eigenvectors.T @ np.asarray(x, dtype=np.float64)


def laplacian_eig(g: Graph, cap: int = TOL.eig_cap) -> SpectralDecomposition:
    """Eigendecomposition of L = I - normalize_sym(g), eigenvalues ascending.

    Eigenvalues of this augmented Laplacian lie in [0, 2); they fall inside
    [0, 1.5] for most sparse graphs but not all (complete bipartite K_{4,4}
    reaches 1.6).
    """
    if g.n_nodes > cap:
        raise CapExceeded(f"laplacian_eig: N={g.n_nodes} exceeds cap {cap}")
    lap = np.eye(g.n_nodes) - normalize_sym(g).toarray()
    lap = 0.5 * (lap + lap.T)
    w, v = np.linalg.eigh(lap)
    resid = np.linalg.norm(lap - (v * w) @ v.T)
    if resid > TOL.eig_residual * max(np.linalg.norm(lap), 1.0):
        raise ArithmeticError(f"eigendecomposition residual {resid:.3e} too large")
    # clip roundoff below zero; the smallest eigenvalue is exactly 0
    w = np.where(np.abs(w) < TOL.eig_slack, 0.0, w)
    return SpectralDecomposition(_frozen(w), _frozen(v))


def read_edge_list(path) -> tuple[int, np.ndarray]:
    """Parse a whitespace ``src dst`` edge list; returns (max id + 1, edges)."""
    path = Path(path)
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.split("#", 1)[0].strip()
            if not s:
                continue
            parts = s.split()
            if len(parts) < 2:
                raise ParseError(path, lineno, f"expected 'src dst', got {line.strip()!r}")
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(path, lineno, f"non-integer node id in {line.strip()!r}") from None
            if i < 0 or j < 0:
                raise ParseError(path, lineno, "negative node id")
            rows.append((i, j))
    e = np.asarray(rows, dtype=np.int64).reshape(-1, 2)
    n = int(e.max()) + 1 if e.size else 0
    return n, e


def load_edge_list(path, n_nodes=None) -> Graph:
    n, e = read_edge_list(path)
    return Graph.from_edges(n if n_nodes is None else n_nodes, e)


def write_edge_list(g: Graph, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        for i, j in g.edges():
            fh.write(f"{i} {j}\n")
