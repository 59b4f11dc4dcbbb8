"""Labeled node-classification datasets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import Graph


def one_hot(labels, n_classes=None) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    c = int(labels.max()) + 1 if n_classes is None else n_classes
    y = np.zeros((len(labels), c))
    y[np.arange(len(labels)), labels] = 1.0
    return y


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Graph, node features, dense labels 0..C-1 and disjoint split masks."""

    graph: Graph
    features: np.ndarray
    labels: np.ndarray
    train_mask: np.ndarray
    val_mask: np.ndarray
    test_mask: np.ndarray
    name: str = "dataset"

    def __post_init__(self):
        n = self.graph.n_nodes
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise ValueError(f"features must have {n} rows, got shape {self.features.shape}")
        if self.labels.shape != (n,):
            raise ValueError(f"labels must have length {n}")
        present = np.unique(self.labels)
        if present[0] != 0 or not np.array_equal(present, np.arange(len(present))):
            raise ValueError("labels must be dense 0..C-1 with every class present")
        masks = np.stack([self.train_mask, self.val_mask, self.test_mask])
        if masks.shape != (3, n) or masks.dtype != bool:
            raise ValueError("masks must be boolean vectors of length N")
        if (masks.sum(axis=0) > 1).any():
            raise ValueError("train/val/test masks overlap")
        if not np.isfinite(self.features).all():
            raise ValueError("features contain NaN or Inf")

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def n_classes(self) -> int:
        return int(self.labels.max()) + 1

    def one_hot(self) -> np.ndarray:
        return one_hot(self.labels, self.n_classes)

    def with_graph(self, graph: Graph) -> "LabeledDataset":
        return LabeledDataset(graph, self.features, self.labels, self.train_mask,
                              self.val_mask, self.test_mask, self.name)

    def permute(self, perm) -> "LabeledDataset":
        """Relabel node ``i`` as ``perm[i]`` in every field."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        return LabeledDataset(self.graph.permute(perm), self.features[inv], self.labels[inv],
                              self.train_mask[inv], self.val_mask[inv], self.test_mask[inv],
                              self.name)


def stratified_split(labels, seed, fractions=(0.6, 0.2, 0.2)):
    """Per-class random 60/20/20 split; every class gets at least one train node."""
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    n = len(labels)
    masks = [np.zeros(n, dtype=bool) for _ in range(3)]
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(len(idx))]
        n_train = max(1, int(round(fractions[0] * len(idx))))
        n_val = int(round(fractions[1] * len(idx)))
        n_val = min(n_val, len(idx) - n_train)
        masks[0][idx[:n_train]] = True
        masks[1][idx[n_train:n_train + n_val]] = True
        masks[2][idx[n_train + n_val:]] = True
    return tuple(masks)
