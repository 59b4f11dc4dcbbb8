import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sggnn.attributes import compute_attributes, standardize
from sggnn.config import SgGnnConfig
from sggnn.data import LabeledDataset, one_hot
from sggnn.discovery import GraphBundle, discover
from sggnn.errors import EmptyTrainSet, MissingClassInTrain, ShapeMismatch
from sggnn.gnn import (ModelParams, alpha_weights, evaluate, fbgnn_layer, gcn_layer, grad_check,
                       init_params, preset, random_instance, sg_forward, theorem_gnn, train)
from sggnn.graph import Graph, normalize_sym
from sggnn.synthetic import heterophilic_sbm
from tests.helpers import gnp, path

VARIANTS = ["gcn", "fbgnn", "sg-global", "sg-node", "sg-multi"]


def relu(x):
    return np.maximum(x, 0.0)


# --- layers -----------------------------------------------------------------------

def test_gcn_layer_examples():
    x = np.array([[-1.0, 2.0]])
    np.testing.assert_array_equal(gcn_layer(x, normalize_sym(Graph.empty(1)), np.eye(2)), [[0.0, 2.0]])
    assert not gcn_layer(np.ones((3, 2)), normalize_sym(path(3)), np.zeros((2, 4))).any()
    out = gcn_layer(np.array([[0.0], [1.0]]), normalize_sym(path(2)), np.array([[1.0]]))
    np.testing.assert_allclose(out, [[0.5], [0.5]], atol=1e-15)


def test_gcn_layer_identity_operator_is_dense_layer():
    rng = np.random.default_rng(0)
    h, theta = rng.normal(size=(5, 3)), rng.normal(size=(3, 2))
    np.testing.assert_allclose(gcn_layer(h, np.eye(5), theta, "identity"), h @ theta, atol=1e-14)


def test_fbgnn_layer_examples():
    rng = np.random.default_rng(1)
    op = normalize_sym(gnp(6, 0.5, rng))
    h, t0, t1 = rng.normal(size=(6, 3)), rng.normal(size=(3, 2)), rng.normal(size=(3, 2))
    np.testing.assert_allclose(fbgnn_layer(h, op, [t0]), relu(h @ t0), atol=1e-14)
    np.testing.assert_allclose(fbgnn_layer(h, op, [t0, np.zeros_like(t1), np.zeros_like(t1)]),
                               relu(h @ t0), atol=1e-14)
    out = fbgnn_layer(np.array([[1.0], [0.0]]), normalize_sym(path(2)), [np.eye(1), np.eye(1)],
                      "identity")
    np.testing.assert_allclose(out, [[1.5], [0.5]], atol=1e-15)


def test_fbgnn_layer_matches_explicit_powers():
    rng = np.random.default_rng(2)
    g = gnp(7, 0.4, rng)
    a = normalize_sym(g).toarray()
    h = rng.normal(size=(7, 3))
    thetas = [rng.normal(size=(3, 2)) for _ in range(4)]
    expected = sum(np.linalg.matrix_power(a, s) @ h @ t for s, t in enumerate(thetas))
    np.testing.assert_allclose(fbgnn_layer(h, normalize_sym(g), thetas, "identity"), expected,
                               atol=1e-12)


@pytest.mark.parametrize("bad", [
    lambda: gcn_layer(np.ones((3, 2)), np.eye(4), np.ones((2, 2))),
    lambda: gcn_layer(np.ones((3, 2)), np.eye(3), np.ones((3, 2))),
    lambda: fbgnn_layer(np.ones((3, 2)), np.eye(3), [np.ones((2, 2)), np.ones((2, 3))]),
    lambda: fbgnn_layer(np.ones((3, 2)), np.eye(3), []),
])
def test_layer_shape_errors(bad):
    with pytest.raises(ShapeMismatch):
        bad()


def test_theorem_gnn_single_node_identity():
    x = np.array([[0.3, -0.7]])
    out = theorem_gnn(x, Graph.empty(1), np.eye(2), np.eye(2), "identity", "identity")
    np.testing.assert_allclose(out, x)


@pytest.mark.parametrize("seed", range(3))
def test_theorem_gnn_matches_naive_oracle(seed):
    rng = np.random.default_rng(seed)
    g = gnp(9, 0.35, rng)
    x = rng.normal(size=(9, 3))
    t1, t2 = rng.normal(size=(3, 4)), rng.normal(size=(4, 2))
    a = g.dense()
    p = np.zeros((9, 9))
    for i in range(9):
        nb = [j for j in range(9) if a[i, j]] + [i]
        for j in nb:
            p[i, j] = 1.0 / len(nb)
    expected = relu(p @ relu(p @ x @ t1) @ t2)
    np.testing.assert_allclose(theorem_gnn(x, g, t1, t2), expected, atol=1e-12)


# --- SG-GNN forward ------------------------------------------------------------------

def small_problem(seed=0, n_graphs=3, n=10):
    return random_instance(np.random.default_rng(seed), n_nodes=n, n_graphs=n_graphs)


def test_single_graph_sg_reduces_to_phi_then_psi():
    ds, bundle = small_problem(n_graphs=1)
    cfg = preset("sg-global", hidden=5, mlp_hidden=6)
    p = init_params(cfg, 4, ds.n_classes, 1, ds.n_nodes)
    assert alpha_weights(cfg, p).tolist() == [1.0]
    w = p.weights
    h = relu(normalize_sym(bundle[0]) @ ds.features @ w["branch0.layer0.theta0"])
    expected = relu(h @ w["mlp0.w1"] + w["mlp0.b1"]) @ w["mlp0.w2"] + w["mlp0.b2"]
    np.testing.assert_allclose(sg_forward(ds.features, bundle, cfg, p), expected, atol=1e-12)


def test_equal_scores_give_uniform_weights():
    cfg = preset("sg-node")
    p = init_params(cfg, 4, 3, 5, 7)
    np.testing.assert_allclose(alpha_weights(cfg, p), 0.2, atol=1e-15)


def test_edgeless_zero_branch_matches_padded_single_branch():
    rng = np.random.default_rng(3)
    n = 4
    g1 = Graph.from_edges(n, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
    bundle = GraphBundle([g1, Graph.empty(n)])
    x = rng.normal(size=(n, 3))
    cfg = preset("sg-global", hidden=2, mlp_hidden=3)
    p = init_params(cfg, 3, 2, 2, n, rng=rng)
    p.weights["branch1.layer0.theta0"] = np.zeros((3, 2))
    p.weights["alpha_scores"] = np.array([0.4, -0.9])
    a = np.exp([0.4, -0.9]) / np.exp([0.4, -0.9]).sum()
    # hand-built composition: A_hat of g1 by its definition, zero block for branch 2
    adj = g1.dense() + np.eye(n)
    d = adj.sum(axis=1)
    a_hat = adj / np.sqrt(np.outer(d, d))
    h1 = relu(a_hat @ x @ p["branch0.layer0.theta0"])
    z = np.hstack([a[0] * h1, np.zeros((n, 2))])
    expected = relu(z @ p["mlp0.w1"] + p["mlp0.b1"]) @ p["mlp0.w2"] + p["mlp0.b2"]
    np.testing.assert_allclose(sg_forward(x, bundle, cfg, p), expected, atol=1e-12)


@pytest.mark.parametrize("variant", ["sg-global", "sg-node"])
@pytest.mark.parametrize("shift", [-3.0, 0.5, 40.0])
def test_logits_invariant_to_score_shift(variant, shift):
    ds, bundle = small_problem(seed=4)
    cfg = preset(variant)
    p = init_params(cfg, 4, ds.n_classes, 3, ds.n_nodes, rng=np.random.default_rng(5))
    p.weights["alpha_scores"] = np.random.default_rng(6).normal(size=p["alpha_scores"].shape)
    q = p.copy()
    q.weights["alpha_scores"] = q["alpha_scores"] + shift
    np.testing.assert_allclose(sg_forward(ds.features, bundle, cfg, q),
                               sg_forward(ds.features, bundle, cfg, p), atol=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(VARIANTS), st.integers(0, 10_000))
def test_forward_permutation_equivariant(variant, seed):
    ds, bundle = small_problem(seed=seed % 50)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(ds.n_nodes)
    inv = np.argsort(perm)
    cfg = preset(variant, hidden=6, mlp_hidden=5)
    n_graphs = 1 if cfg.variant == "single" else 3
    p = init_params(cfg, 4, ds.n_classes, n_graphs, ds.n_nodes, rng=rng)
    if "alpha_scores" in p.weights:
        p.weights["alpha_scores"] = rng.normal(size=p["alpha_scores"].shape)
    q = p.copy()
    if cfg.variant == "node_alpha":
        q.weights["alpha_scores"] = p["alpha_scores"][inv]
    members = bundle if n_graphs == 3 else GraphBundle([bundle[0]])
    z = sg_forward(ds.features, members, cfg, p)
    zp = sg_forward(ds.features[inv], members.permute(perm), cfg, q)
    np.testing.assert_allclose(zp, z[inv], atol=1e-12)


def test_params_must_match_config():
    ds, bundle = small_problem()
    cfg = preset("sg-global")
    p = init_params(cfg, 4, ds.n_classes, 2, ds.n_nodes)
    with pytest.raises(ShapeMismatch):
        sg_forward(ds.features, bundle, cfg, p)
    with pytest.raises(ShapeMismatch):
        sg_forward(ds.features, bundle, preset("gcn"), p)
    with pytest.raises(ShapeMismatch):
        sg_forward(ds.features[:, :3], GraphBundle(list(bundle)[:2]), cfg, p)


def test_config_validation():
    with pytest.raises(ValueError):
        SgGnnConfig(variant="global_alpha", depth=2)
    with pytest.raises(ValueError):
        SgGnnConfig(order=6)
    with pytest.raises(ValueError):
        SgGnnConfig(variant="attention")
    assert preset("sg-multi").depth == 2 and preset("fbgnn").layer == "fbgnn"


# --- training ---------------------------------------------------------------------------

def separable(n=12, c=3):
    y = np.arange(n) % c
    train = np.ones(n, dtype=bool)
    return LabeledDataset(Graph.empty(n), one_hot(y), y, train, np.zeros(n, dtype=bool),
                          np.zeros(n, dtype=bool), name="separable")


@pytest.mark.parametrize("variant", VARIANTS)
def test_separable_task_is_memorised(variant):
    ds = separable()
    cfg = preset(variant, epochs=200)
    params, history = train(ds, GraphBundle([ds.graph, ds.graph]), cfg) if cfg.variant != "single" \
        else train(ds, ds.graph, cfg)
    assert history[-1]["train_acc"] == 1.0


def test_zero_learning_rate_keeps_parameters():
    ds = separable()
    cfg = preset("sg-global", lr=0.0, epochs=20)
    bundle = GraphBundle([ds.graph])
    init = init_params(cfg, 3, 3, 1, ds.n_nodes)
    params, history = train(ds, bundle, cfg)
    for k in init.keys():
        np.testing.assert_array_equal(params[k], init[k])
    assert len({h["loss"] for h in history}) == 1
    assert len(history) == 21


@pytest.mark.parametrize("variant", VARIANTS)
def test_loss_non_increasing_with_small_steps(variant):
    ds = separable()
    cfg = preset(variant, lr=1e-3, epochs=60)
    bundle = GraphBundle([ds.graph, ds.graph]) if preset(variant).variant != "single" else ds.graph
    _, history = train(ds, bundle, cfg)
    losses = np.array([h["loss"] for h in history])
    assert np.all(np.diff(losses) <= 1e-8)


def test_training_is_deterministic():
    ds, bundle = small_problem(seed=7)
    cfg = preset("sg-node", epochs=15, seed=3)
    a, ha = train(ds, bundle, cfg)
    b, hb = train(ds, bundle, cfg)
    assert a.flat().tobytes() == b.flat().tobytes()
    assert repr(ha) == repr(hb)  # nan-safe: the test split is empty here


def test_alpha_stays_on_simplex_after_training():
    ds, bundle = small_problem(seed=8)
    for variant in ("sg-global", "sg-node"):
        cfg = preset(variant, epochs=30, lr=0.5)
        params, _ = train(ds, bundle, cfg)
        alpha = alpha_weights(cfg, params)
        np.testing.assert_allclose(alpha.sum(axis=-1), 1.0, atol=1e-12)
        assert np.all(alpha > 0)


def test_best_validation_epoch_is_returned():
    ds, bundle = small_problem(seed=9)
    cfg = preset("gcn", epochs=40, lr=0.2)
    params, history = train(ds, bundle[0], cfg)
    best = max(h["val_acc"] for h in history)
    assert evaluate(ds, bundle[0], cfg, params)["val_acc"] == best


def test_training_errors():
    ds = separable()
    empty = LabeledDataset(ds.graph, ds.features, ds.labels, np.zeros(12, dtype=bool),
                           ds.val_mask, ds.test_mask)
    with pytest.raises(EmptyTrainSet):
        train(empty, ds.graph, preset("gcn"))
    partial = ds.labels != 2
    missing = LabeledDataset(ds.graph, ds.features, ds.labels, partial, ds.val_mask, ds.test_mask)
    with pytest.raises(MissingClassInTrain):
        train(missing, ds.graph, preset("gcn"))


def test_weight_decay_enters_objective():
    ds = separable()
    cfg0 = preset("gcn", weight_decay=0.0, epochs=0)
    cfg1 = preset("gcn", weight_decay=0.1, epochs=0)
    p = init_params(cfg0, 3, 3)
    _, h0 = train(ds, ds.graph, cfg0, p)
    _, h1 = train(ds, ds.graph, cfg1, p)
    reg = 0.05 * sum((v ** 2).sum() for v in p.weights.values())
    assert h1[0]["loss"] - h0[0]["loss"] == pytest.approx(reg, rel=1e-12)


# --- gradient checks --------------------------------------------------------------------

@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("seed", [0, 1])
def test_grad_check_variants(variant, seed):
    res = grad_check(preset(variant, hidden=4, mlp_hidden=5), seed=seed)
    assert res.max_rel_error < 1e-5
    assert res.n_checked > 0


@pytest.mark.parametrize("order", [1, 3])
def test_grad_check_multilayer_filter_bank(order):
    cfg = preset("sg-multi", layer="fbgnn", order=order, hidden=3, mlp_hidden=4)
    assert grad_check(cfg, seed=2).max_rel_error < 1e-5


def test_grad_check_size_limit():
    with pytest.raises(ValueError):
        grad_check(preset("gcn"), n_nodes=13)


# --- synthetic comparison -----------------------------------------------------------

def test_sg_gnn_beats_gcn_on_heterophilic_two_block_task():
    results = {name: [] for name in VARIANTS if name != "fbgnn"}
    for seed in range(5):
        ds = heterophilic_sbm(n_per_class=40, n_classes=2, seed=seed)
        role = discover(standardize(compute_attributes(ds.graph, "role")), "knn", 3)
        bundle = GraphBundle([ds.graph, role])
        for name in results:
            cfg = preset(name, seed=seed)
            members = GraphBundle([ds.graph]) if cfg.variant == "single" else bundle
            params, _ = train(ds, members, cfg)
            results[name].append(evaluate(ds, members, cfg, params)["test_acc"])
    gcn = np.mean(results.pop("gcn"))
    for name, accs in results.items():
        assert np.mean(accs) >= gcn, name


def test_model_params_helpers():
    p = ModelParams({"a": np.ones((2, 2)), "b": np.zeros(3)})
    assert p.n_values() == 7
    q = p.copy()
    q.weights["a"][0, 0] = 5
    assert p["a"][0, 0] == 1
    assert p.flat().shape == (7,)
