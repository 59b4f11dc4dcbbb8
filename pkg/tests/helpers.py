"""Graph builders and hypothesis strategies shared by the tests."""

import numpy as np
from hypothesis import strategies as st

from sggnn.graph import Graph


def gnp(n, p, rng):
    """Erdos-Renyi graph from a numpy generator."""
    iu = np.triu_indices(n, k=1)
    keep = rng.random(len(iu[0])) < p
    return Graph.from_edges(n, np.column_stack([iu[0][keep], iu[1][keep]]))


def path(n):
    return Graph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def cycle(n):
    return Graph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def complete(n):
    return Graph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star(leaves):
    return Graph.from_edges(leaves + 1, [(0, j) for j in range(1, leaves + 1)])


@st.composite
def graphs(draw, min_nodes=1, max_nodes=12):
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return Graph.from_edges(n, [p for p, keep in zip(pairs, mask) if keep])


@st.composite
def labeled_graphs(draw, min_nodes=2, max_nodes=12, max_classes=4):
    g = draw(graphs(min_nodes, max_nodes))
    labels = draw(st.lists(st.integers(0, max_classes - 1), min_size=g.n_nodes,
                           max_size=g.n_nodes))
    return g, np.array(labels)


@st.composite
def permutations(draw, n):
    return np.array(draw(st.permutations(list(range(n)))))
