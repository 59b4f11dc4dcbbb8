"""Synthetic heterophilic benchmarks with known structure."""

from __future__ import annotations

import numpy as np

from .data import LabeledDataset, stratified_split
from .graph import Graph


def heterophilic_sbm(n_per_class=60, n_classes=4, degree_levels=None, p_in=0.01, p_out=0.06,
                     feature_dim=8, signal=1.0, noise=1.5, seed=0) -> LabeledDataset:
    """Degree-corrected block model whose edges mostly join different classes.

    Class ``c`` gets degree propensity ``degree_levels[c]``. By default the
    first half of the classes is low-degree and the second half high-degree,
    so structural attributes tell the halves apart but not the classes within
    a half; the noisy features carry the remaining distinction. The views are
    complementary by design: no single graph carries the whole label signal.
    """
    rng = np.random.default_rng(seed)
    if degree_levels is None:
        degree_levels = np.where(np.arange(n_classes) < n_classes // 2, 1.0, 3.0)
    levels = np.asarray(degree_levels, dtype=np.float64)
    y = np.repeat(np.arange(n_classes), n_per_class)
    n = len(y)
    i, j = np.triu_indices(n, k=1)
    base = np.where(y[i] == y[j], p_in, p_out)
    prob = np.clip(base * levels[y[i]] * levels[y[j]], 0.0, 1.0)
    keep = rng.random(len(i)) < prob
    g = Graph.from_edges(n, np.column_stack([i[keep], j[keep]]))
    centers = rng.normal(size=(n_classes, feature_dim))
    centers *= signal / np.linalg.norm(centers, axis=1, keepdims=True)
    x = centers[y] + noise * rng.normal(size=(n, feature_dim)) / np.sqrt(feature_dim)
    train, val, test = stratified_split(y, seed)
    return LabeledDataset(g, x, y, train, val, test, name="hetero_sbm")
