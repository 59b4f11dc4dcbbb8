"""Numerical checks of the error bound, the multi-graph probability bounds and the
spectral smoothing inequality, plus the random labeled-graph model they assume."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import TOL
from .errors import IndivisibleClasses, NotRecoverable, ShapeMismatch
from .gnn import theorem_gnn
from .graph import Graph, laplacian_eig, normalize_sym
from .homophily import ideal_adjacency, ideal_features


@dataclass(frozen=True)
class BoundReport:
    lhs: float
    rhs: float
    components: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return self.lhs <= self.rhs + TOL.bound_violation


@dataclass(frozen=True)
class MonteCarloReport:
    trials: int
    successes: int
    lower_bound: float

    @property
    def empirical(self) -> float:
        return self.successes / self.trials

    @property
    def sigma(self) -> float:
        p = min(max(self.empirical, 1.0 / self.trials), 1.0 - 1.0 / self.trials)
        return float(np.sqrt(p * (1.0 - p) / self.trials))

    @property
    def slack_sigmas(self) -> float:
        return (self.empirical - self.lower_bound) / self.sigma

    def consistent(self, n_sigma: float = 3.0) -> bool:
        """The bound is one-sided: only an empirical rate far *below* it counts as failure."""
        return self.empirical >= self.lower_bound - n_sigma * self.sigma


# --- recoverability ------------------------------------------------------------------

def class_representatives(u, labels):
    """(representatives, identical-within-class flag)."""
    u = np.asarray(u, dtype=np.float64)
    y = np.asarray(labels)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[0] != len(y):
        raise ShapeMismatch(f"u has {u.shape[0]} rows, labels {len(y)}")
    classes = np.unique(y)
    reps = np.empty((len(classes), u.shape[1]))
    within = True
    for k, c in enumerate(classes):
        rows = u[y == c]
        reps[k] = rows[0]
        if np.abs(rows - rows[0]).max(initial=0.0) > TOL.recover_within:
            within = False
    return reps, within


def recovers(u, labels) -> bool:
    """True when every class maps to one row vector and distinct classes to distinct vectors."""
    reps, within = class_representatives(u, labels)
    if not within:
        return False
    for a in range(len(reps)):
        for b in range(a + 1, len(reps)):
            if np.abs(reps[a] - reps[b]).max(initial=0.0) <= TOL.recover_between:
                return False
    return True


# --- error bound for the two-layer network ------------------------------------------------

def theorem1_check(features, graph: Graph, labels, theta1, theta2,
                   sigma1="relu", sigma2="relu") -> BoundReport:
    """||Z* - Z||_F against rho1 rho2 (alpha sqrt(N) + 2 (1 + sqrt(N)) ||Delta||_F ||X||_F).

    Z is the network on (X, A) and Z* on (X*, A*), where X* holds class-mean
    features and A* keeps only same-label edges.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels)
    x_star = ideal_features(x, y)
    if not recovers(x_star, y):
        raise NotRecoverable("class-mean features do not separate the classes")
    a_star, delta_fro = ideal_adjacency(graph, y)
    z_hat = theorem_gnn(x, graph, theta1, theta2, sigma1, sigma2)
    z_star = theorem_gnn(x_star, a_star, theta1, theta2, sigma1, sigma2)
    rho1 = float(np.linalg.norm(theta1, 2))
    rho2 = float(np.linalg.norm(theta2, 2))
    alpha = float(np.linalg.norm(x_star - x, axis=1).max())
    x_fro = float(np.linalg.norm(x))
    n = graph.n_nodes
    feat_term = rho1 * rho2 * alpha * np.sqrt(n)
    edge_term = rho1 * rho2 * 2.0 * (1.0 + np.sqrt(n)) * delta_fro * x_fro
    reps, within = class_representatives(z_star, y)
    distinct = recovers(z_star, y)
    return BoundReport(
        lhs=float(np.linalg.norm(z_star - z_hat)),
        rhs=float(feat_term + edge_term),
        components={"rho1": rho1, "rho2": rho2, "alpha": alpha, "delta_fro": delta_fro,
                    "x_fro": x_fro, "feature_term": float(feat_term),
                    "edge_term": float(edge_term), "n": n},
        # z_star is always constant within classes; distinctness can fail when relu
        # or a rank-deficient weight maps two class means to the same row
        flags={"z_star_within_class": within, "z_star_recovers": distinct},
    )


def random_theorem_instance(seed, n_range=(10, 30), c_range=(2, 4), hidden=None,
                            p_edge=None, noise=None):
    """Random (features, graph, labels, theta1, theta2) with distinct class means."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    c = int(rng.integers(c_range[0], c_range[1] + 1))
    labels = np.concatenate([np.arange(c), rng.integers(0, c, n - c)])[rng.permutation(n)]
    m = int(rng.integers(2, 7))
    means = rng.normal(size=(c, m))
    noise = rng.uniform(0.0, 1.0) if noise is None else noise
    x = means[labels] + noise * rng.normal(size=(n, m))
    p = rng.uniform(0.05, 0.5) if p_edge is None else p_edge
    iu = np.triu_indices(n, k=1)
    keep = rng.random(len(iu[0])) < p
    g = Graph.from_edges(n, np.column_stack([iu[0][keep], iu[1][keep]]))
    h = int(rng.integers(2, 9)) if hidden is None else hidden
    theta1 = rng.uniform(-1.0, 1.0, size=(m, h))
    theta2 = rng.uniform(-1.0, 1.0, size=(h, c))
    return x, g, labels, theta1, theta2


# --- random labeled graphs ---------------------------------------------------------

def _check_divisible(n, c):
    if c < 1 or n % c:
        raise IndivisibleClasses(f"n={n} is not divisible into {c} equal classes")


def block_labels(n, c):
    _check_divisible(n, c)
    return np.repeat(np.arange(c), n // c)


def cross_pair_count(n, c) -> int:
    """Unordered pairs with different labels under equal class sizes: N^2 (C-1) / (2C)."""
    _check_divisible(n, c)
    return n * n * (c - 1) // (2 * c)


def _pairs(n):
    return np.triu_indices(n, k=1)


def sample_labeled_graph(n, c, q, p_intra=0.3, rng=None):
    """Equal-size classes; each cross-class pair is an edge w.p. q, each same-class pair w.p. p_intra."""
    _check_divisible(n, c)
    if not (0 <= q <= 1 and 0 <= p_intra <= 1):
        raise ValueError("edge probabilities must lie in [0, 1]")
    rng = np.random.default_rng(rng)
    y = block_labels(n, c)
    i, j = _pairs(n)
    prob = np.where(y[i] != y[j], q, p_intra)
    keep = rng.random(len(i)) < prob
    return Graph.from_edges(n, np.column_stack([i[keep], j[keep]])), y


def prop1_bound(n, c, q, r) -> float:
    return float(1.0 - (1.0 - (1.0 - q) ** cross_pair_count(n, c)) ** r)


def prop2_bound(n, c, q, r) -> float:
    _check_divisible(n, c)
    per_node = n * (c - 1) // c
    return float((1.0 - (1.0 - (1.0 - q) ** per_node) ** r) ** n)


def _cross_indicators(n, c, q, r, trials, seed, p_intra):
    """(trials, r, n_pairs) edge indicators restricted to cross-class pairs.

    Each trial draws its graphs from its own stream seeded by (seed, trial),
    so results do not depend on how trials are batched or scheduled.
    """
    y = block_labels(n, c)
    i, j = _pairs(n)
    prob = np.where(y[i] != y[j], q, p_intra)
    cross = y[i] != y[j]
    out = np.empty((trials, r, int(cross.sum())), dtype=bool)
    for t in range(trials):
        draw = np.random.default_rng([seed, t]).random((r, len(i))) < prob
        out[t] = draw[:, cross]
    return out, i[cross], j[cross]


def prop1_verify(n, c, q, r, trials=5000, seed=0, p_intra=0.3) -> MonteCarloReport:
    """Rate at which some graph among r independent draws has no cross-class edge."""
    if trials < 1:
        raise ValueError("trials must be positive")
    ind, _, _ = _cross_indicators(n, c, q, r, trials, seed, p_intra)
    clean = ~ind.any(axis=2)
    return MonteCarloReport(trials, int(clean.any(axis=1).sum()), prop1_bound(n, c, q, r))


def prop2_verify(n, c, q, r, trials=5000, seed=0, p_intra=0.3) -> MonteCarloReport:
    """Rate at which every node has, in some draw, no cross-class neighbour."""
    if trials < 1:
        raise ValueError("trials must be positive")
    ind, ci, cj = _cross_indicators(n, c, q, r, trials, seed, p_intra)
    incidence = np.zeros((len(ci), n))
    incidence[np.arange(len(ci)), ci] = 1.0
    incidence[np.arange(len(cj)), cj] = 1.0
    bad = ind.astype(np.float64) @ incidence
    node_ok = (bad == 0).any(axis=1)
    return MonteCarloReport(trials, int(node_ok.all(axis=1).sum()), prop2_bound(n, c, q, r))


# --- spectral smoothing -----------------------------------------------------------

def spectral_tv_check(g: Graph, x, depth: int) -> BoundReport:
    """TV(A^L x)^2 = ||(I - A) A^L x||_1^2 against N sum_i lam_i^2 (1 - lam_i)^(2L) xt_i^2."""
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.shape != (g.n_nodes,):
        raise ShapeMismatch(f"signal must have length {g.n_nodes}")
    spec = laplacian_eig(g)
    a = normalize_sym(g)
    v = x.copy()
    for _ in range(depth):
        v = a @ v
    lhs = float(np.abs(v - a @ v).sum() ** 2)
    lam = spec.eigenvalues
    xt = spec.fourier(x)
    terms = lam ** 2 * (1.0 - lam) ** (2 * depth) * xt ** 2
    return BoundReport(
        lhs=lhs,
        rhs=float(g.n_nodes * terms.sum()),
        components={"l2_squared": float(terms.sum()), "depth": depth,
                    "max_gain": float(((1.0 - lam) ** 2).max())},
    )
