import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sggnn.data import one_hot
from sggnn.errors import IndivisibleClasses, NotRecoverable
from sggnn.graph import Graph
from sggnn.homophily import ideal_adjacency, ideal_features, q_hat
from sggnn.theory import (MonteCarloReport, cross_pair_count, prop1_bound, prop1_verify,
                          prop2_bound, prop2_verify, random_theorem_instance, recovers,
                          sample_labeled_graph, spectral_tv_check, theorem1_check)
from tests.helpers import cycle, gnp

Y = np.array([0, 1, 2, 1, 0, 2, 2])


# --- recoverability ---------------------------------------------------------------

def test_one_hot_recovers():
    assert recovers(one_hot(Y), Y)


def test_all_zero_does_not_recover():
    assert not recovers(np.zeros((7, 3)), Y)


def test_class_means_recover_only_when_distinct():
    rng = np.random.default_rng(0)
    means = rng.normal(size=(3, 4))
    x = means[Y] + 0.3 * rng.normal(size=(7, 4))
    assert recovers(ideal_features(x, Y), Y)
    # shift class 2 so its mean lands on class 0's mean
    x2 = x.copy()
    x2[Y == 2] += ideal_features(x, Y)[Y == 0][0] - ideal_features(x, Y)[Y == 2][0]
    assert not recovers(ideal_features(x2, Y), Y)


def test_recovers_requires_identical_rows_within_class():
    u = one_hot(Y).astype(float)
    u[0, 0] += 1e-6
    assert not recovers(u, Y)


# --- error bound -----------------------------------------------------------------------

def test_ideal_inputs_give_zero_bound():
    rng = np.random.default_rng(1)
    y = np.array([0, 0, 1, 1, 2, 2])
    x = rng.normal(size=(3, 4))[y]
    g = Graph.from_edges(6, [(0, 1), (2, 3), (4, 5)])
    rep = theorem1_check(x, g, y, rng.uniform(-1, 1, (4, 5)), rng.uniform(-1, 1, (5, 3)))
    assert rep.lhs == 0.0 and rep.rhs == 0.0 and rep.satisfied


@pytest.mark.parametrize("seed", range(5))
def test_homophilous_graph_meets_feature_term(seed):
    rng = np.random.default_rng(seed)
    g, y = sample_labeled_graph(12, 3, 0.0, p_intra=0.6, rng=rng)
    x = rng.normal(size=(3, 3))[y] + 0.2 * rng.normal(size=(12, 3))
    t1, t2 = rng.uniform(-1, 1, (3, 4)), rng.uniform(-1, 1, (4, 3))
    rep = theorem1_check(x, g, y, t1, t2)
    assert rep.components["delta_fro"] == 0.0
    alpha0 = np.linalg.norm(ideal_features(x, y) - x, axis=1).max()
    restricted = np.linalg.norm(t1, 2) * np.linalg.norm(t2, 2) * alpha0 * np.sqrt(12)
    assert rep.lhs <= restricted + 1e-9
    assert rep.rhs == pytest.approx(restricted, rel=1e-12)


def test_components_reassemble_rhs():
    x, g, y, t1, t2 = random_theorem_instance(3)
    rep = theorem1_check(x, g, y, t1, t2)
    c = rep.components
    n = c["n"]
    rhs = c["rho1"] * c["rho2"] * (c["alpha"] * np.sqrt(n)
                                   + 2 * (1 + np.sqrt(n)) * c["delta_fro"] * c["x_fro"])
    assert rep.rhs == pytest.approx(rhs, rel=1e-12)
    assert c["delta_fro"] == ideal_adjacency(g, y)[1]
    assert all(v >= 0 for v in c.values())


def test_z_star_constant_within_classes():
    for seed in range(20):
        rep = theorem1_check(*random_theorem_instance(seed))
        assert rep.flags["z_star_within_class"]


def test_not_recoverable_features():
    y = np.array([0, 0, 1, 1])
    x = np.array([[1.0], [-1.0], [2.0], [-2.0]])  # both class means are zero
    with pytest.raises(NotRecoverable):
        theorem1_check(x, Graph.empty(4), y, np.eye(1), np.eye(1))


@pytest.mark.parametrize("seed", range(50))
def test_bound_holds_on_random_instances(seed):
    assert theorem1_check(*random_theorem_instance(seed)).satisfied


@pytest.mark.parametrize("sigma", ["identity", "relu"])
def test_bound_holds_for_each_activation(sigma):
    for seed in range(20):
        x, g, y, t1, t2 = random_theorem_instance(seed)
        assert theorem1_check(x, g, y, t1, t2, sigma, sigma).satisfied


# --- random labeled graphs -------------------------------------------------------------

def test_no_cross_edges_when_q_is_zero():
    for seed in range(10):
        g, y = sample_labeled_graph(12, 3, 0.0, rng=seed)
        assert q_hat(g, y) == 0.0


def test_complete_multipartite_when_q_is_one():
    g, y = sample_labeled_graph(12, 3, 1.0, p_intra=0.0, rng=0)
    expected = {(i, j) for i in range(12) for j in range(i + 1, 12) if y[i] != y[j]}
    assert g.edge_set() == expected
    assert np.bincount(y).tolist() == [4, 4, 4]


def test_cross_edge_count_is_binomial():
    n, c, q, draws = 12, 2, 0.1, 10_000
    assert cross_pair_count(n, c) == 36
    rng = np.random.default_rng(0)
    counts = np.empty(draws)
    for t in range(draws):
        g, y = sample_labeled_graph(n, c, q, rng=rng)
        e = g.edges()
        counts[t] = np.count_nonzero(y[e[:, 0]] != y[e[:, 1]])
    sigma = np.sqrt(36 * q * (1 - q) / draws)
    assert abs(counts.mean() - 3.6) <= 3 * sigma


@pytest.mark.parametrize("n, c", [(10, 3), (7, 2), (5, 0)])
def test_indivisible_classes(n, c):
    with pytest.raises(IndivisibleClasses):
        sample_labeled_graph(n, c, 0.1)
    with pytest.raises(IndivisibleClasses):
        prop1_bound(n, c, 0.1, 2)


# --- probability bounds -----------------------------------------------------------------

@pytest.mark.parametrize("verify", [prop1_verify, prop2_verify])
def test_prop_extremes(verify):
    rep = verify(12, 3, 0.0, 3, trials=200)
    assert rep.empirical == 1.0 and rep.lower_bound == 1.0
    rep = verify(12, 3, 1.0, 1 if verify is prop2_verify else 4, trials=200)
    assert rep.empirical == 0.0 and rep.lower_bound == 0.0


def test_prop1_bound_closed_form():
    # 36 cross pairs: 1 - (1 - 0.99^36)^2
    assert prop1_bound(12, 2, 0.01, 2) == pytest.approx(1 - (1 - 0.99 ** 36) ** 2, abs=1e-15)
    assert prop2_bound(12, 3, 0.02, 4) == pytest.approx((1 - (1 - 0.98 ** 8) ** 4) ** 12, abs=1e-15)


@given(st.sampled_from([(12, 2), (12, 3), (20, 4), (30, 5)]), st.floats(0, 1), st.floats(0, 1),
       st.integers(1, 16))
def test_bounds_monotone(nc, q1, q2, r):
    n, c = nc
    lo, hi = sorted((q1, q2))
    for bound in (prop1_bound, prop2_bound):
        assert bound(n, c, lo, r) >= bound(n, c, hi, r) - 1e-15
        assert bound(n, c, lo, r + 1) >= bound(n, c, lo, r) - 1e-15
        assert 0.0 <= bound(n, c, lo, r) <= 1.0


def test_prop_verify_is_consistent_and_reproducible():
    a = prop1_verify(12, 2, 0.01, 2, trials=1000, seed=4)
    b = prop1_verify(12, 2, 0.01, 2, trials=1000, seed=4)
    assert a == b and a.consistent()
    assert prop2_verify(12, 3, 0.02, 4, trials=1000, seed=4).consistent()


def test_prop2_event_implies_prop1_event_for_single_draw():
    # with R=1 "every node clean" means the one graph has no cross edge
    a = prop1_verify(12, 3, 0.01, 1, trials=1000, seed=2)
    b = prop2_verify(12, 3, 0.01, 1, trials=1000, seed=2)
    assert a.successes == b.successes


def test_monte_carlo_sigma_clipping():
    rep = MonteCarloReport(1000, 1000, 1.0)
    assert rep.sigma == pytest.approx(np.sqrt(0.001 * 0.999 / 1000))
    assert rep.consistent()
    low = MonteCarloReport(1000, 400, 0.6)
    assert low.slack_sigmas < -3 and not low.consistent()


# --- spectral smoothing ------------------------------------------------------------------

def test_constant_signal_on_regular_graph():
    rep = spectral_tv_check(cycle(8), np.ones(8), 2)
    assert rep.lhs == pytest.approx(0.0, abs=1e-24)
    assert rep.rhs == pytest.approx(0.0, abs=1e-20)
    assert rep.satisfied


@pytest.mark.parametrize("seed", range(10))
def test_depth_zero_is_cauchy_schwarz(seed):
    rng = np.random.default_rng(seed)
    g = gnp(16, 0.4, rng)
    x = rng.normal(size=16)
    rep = spectral_tv_check(g, x, 0)
    assert rep.satisfied
    a = np.eye(16) + g.dense()
    d = a.sum(axis=1)
    v = x - (a / np.sqrt(np.outer(d, d))) @ x
    assert rep.lhs == pytest.approx(np.abs(v).sum() ** 2, rel=1e-12)
    assert rep.rhs == pytest.approx(16 * (v ** 2).sum(), rel=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_spectral_bound_and_depth_monotonicity(seed):
    rng = np.random.default_rng(seed)
    g = gnp(16, 0.4, rng)
    x = rng.normal(size=16)
    reps = [spectral_tv_check(g, x, depth) for depth in (1, 2, 3)]
    assert all(r.satisfied for r in reps)
    if reps[0].components["max_gain"] <= 1.0:
        assert reps[0].rhs >= reps[1].rhs >= reps[2].rhs
