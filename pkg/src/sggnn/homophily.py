"""Label-versus-graph diagnostics: homophily, total variation, false-positive edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import one_hot
from .errors import EmptyClass, EmptyGraph, ShapeMismatch, SingleClass
from .graph import Graph, normalize_sym

# h_node value reported for nodes without neighbours
ISOLATED_SENTINEL = 1.0
HIST_BINS = 10


def _labels(g, labels):
    y = np.asarray(labels)
    if y.shape != (g.n_nodes,):
        raise ShapeMismatch(f"labels must have length {g.n_nodes}, got {y.shape}")
    return y


def edge_homophily(g: Graph, labels) -> float:
    y = _labels(g, labels)
    e = g.edges()
    if len(e) == 0:
        raise EmptyGraph("edge homophily is undefined on a graph without edges")
    same = int(np.count_nonzero(y[e[:, 0]] == y[e[:, 1]]))
    return same / len(e)


def node_homophily(g: Graph, labels) -> np.ndarray:
    """Per-node fraction of same-label neighbours; isolated nodes get 1.0."""
    y = _labels(g, labels)
    deg = g.degrees()
    rows = np.repeat(np.arange(g.n_nodes), deg)
    same = np.bincount(rows, weights=(y[rows] == y[g.indices]), minlength=g.n_nodes)
    out = np.full(g.n_nodes, ISOLATED_SENTINEL)
    nz = deg > 0
    out[nz] = same[nz] / deg[nz]
    return out


def node_homophily_histogram(g: Graph, labels, bins=HIST_BINS) -> np.ndarray:
    """Counts over ``bins`` equal bins of [0, 1]; isolated nodes are left out."""
    h = node_homophily(g, labels)[g.degrees() > 0]
    counts, _ = np.histogram(h, bins=bins, range=(0.0, 1.0))
    return counts


def total_variation(g: Graph, signal, per_node: bool = False) -> float:
    """(1/M) * ||S - A_sym S||_1 with the entrywise l1 norm.

    ``per_node=True`` additionally divides by N, giving the mean absolute
    entry of S - A_sym S, which is the scale of the tabulated benchmark values.
    """
    s = np.asarray(signal, dtype=np.float64)
    if s.ndim == 1:
        s = s[:, None]
    if s.ndim != 2 or s.shape[0] != g.n_nodes or s.shape[1] < 1:
        raise ShapeMismatch(f"signal must be ({g.n_nodes}, M>=1), got {s.shape}")
    tv = np.abs(s - normalize_sym(g) @ s).sum() / s.shape[1]
    return float(tv / g.n_nodes) if per_node else float(tv)


def ideal_adjacency(g: Graph, labels) -> tuple[Graph, float]:
    """Drop cross-label edges; returns (A*, ||A - A*||_F)."""
    y = _labels(g, labels)
    e = g.edges()
    keep = y[e[:, 0]] == y[e[:, 1]]
    n_false = int(np.count_nonzero(~keep))
    return Graph.from_edges(g.n_nodes, e[keep]), float(np.sqrt(2.0 * n_false))


def false_positive_norm(g: Graph, labels) -> float:
    """||A - A*||_F / N."""
    return ideal_adjacency(g, labels)[1] / g.n_nodes


def class_means(features, labels) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    c = int(y.max()) + 1
    counts = np.bincount(y, minlength=c)
    if (counts == 0).any():
        raise EmptyClass(f"classes without nodes: {np.flatnonzero(counts == 0).tolist()}")
    yh = one_hot(y, c)
    return (yh.T @ x) / counts[:, None]


def ideal_features(features, labels) -> np.ndarray:
    """Replace each row by the mean feature vector of its class."""
    return class_means(features, labels)[np.asarray(labels)]


def q_hat(g: Graph, labels) -> float:
    """Cross-label edges over cross-label node pairs (both unordered)."""
    y = _labels(g, labels)
    counts = np.bincount(y).astype(np.int64)
    n = g.n_nodes
    cross_pairs = (n * n - int((counts * counts).sum())) // 2
    if cross_pairs == 0:
        raise SingleClass("q_hat needs at least two classes")
    e = g.edges()
    cross_edges = int(np.count_nonzero(y[e[:, 0]] != y[e[:, 1]])) if len(e) else 0
    return cross_edges / cross_pairs


@dataclass(frozen=True)
class HomophilyReport:
    edge_homophily: float
    node_homophily: np.ndarray
    tv: float
    tv_per_node: float
    fp_norm: float
    q_hat: float
    histogram: np.ndarray

    def row(self) -> dict:
        return {
            "tv": self.tv,
            "tv_per_node": self.tv_per_node,
            "edge_homophily": self.edge_homophily,
            "fp_norm": self.fp_norm,
            "q_hat": self.q_hat,
        }


def homophily_report(g: Graph, labels) -> HomophilyReport:
    y = _labels(g, labels)
    yh = one_hot(y)
    h_edge = edge_homophily(g, y) if g.n_edges else float("nan")
    return HomophilyReport(
        edge_homophily=h_edge,
        node_homophily=node_homophily(g, y),
        tv=total_variation(g, yh),
        tv_per_node=total_variation(g, yh, per_node=True),
        fp_norm=false_positive_norm(g, y),
        q_hat=q_hat(g, y),
        histogram=node_homophily_histogram(g, y),
    )
