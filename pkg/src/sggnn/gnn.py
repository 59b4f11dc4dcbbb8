"""Dense GNN layers, the SG-GNN multi-graph models, training and gradient checks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .config import SgGnnConfig
from .discovery import GraphBundle
from .errors import EmptyTrainSet, MissingClassInTrain, ShapeMismatch
from .graph import Graph, normalize_rw, normalize_sym


def _check_inner(a_cols, b_rows, what):
    if a_cols != b_rows:
        raise ShapeMismatch(f"{what}: inner dimensions {a_cols} and {b_rows} differ")


# --- plain numpy layers -------------------------------------------------------

def gcn_layer(h, op, theta, sigma="relu") -> np.ndarray:
    """sigma(op @ h @ theta)."""
    h, theta = np.asarray(h, dtype=np.float64), np.asarray(theta, dtype=np.float64)
    _check_inner(op.shape[1], h.shape[0], "gcn_layer op/h")
    _check_inner(h.shape[1], theta.shape[0], "gcn_layer h/theta")
    return _graph_layer(h, [op], [theta], sigma).value


def fbgnn_layer(h, op, thetas, sigma="relu") -> np.ndarray:
    """sigma(sum_s op^s @ h @ thetas[s]) with op^0 = I."""
    h = np.asarray(h, dtype=np.float64)
    thetas = [np.asarray(t, dtype=np.float64) for t in thetas]
    if not thetas:
        raise ShapeMismatch("fbgnn_layer needs at least one weight matrix")
    _check_inner(op.shape[1], h.shape[0], "fbgnn_layer op/h")
    if len({t.shape for t in thetas}) != 1:
        raise ShapeMismatch("fbgnn_layer weight matrices must share one shape")
    _check_inner(h.shape[1], thetas[0].shape[0], "fbgnn_layer h/theta")
    return _filter_bank(h, op, thetas, sigma).value


def theorem_gnn(x, graph: Graph, theta1, theta2, sigma1="relu", sigma2="relu") -> np.ndarray:
    """Two-layer network sigma2(P sigma1(P X Theta1) Theta2) with P the row-normalised operator."""
    x = np.asarray(x, dtype=np.float64)
    theta1, theta2 = np.asarray(theta1, dtype=np.float64), np.asarray(theta2, dtype=np.float64)
    _check_inner(graph.n_nodes, x.shape[0], "theorem_gnn graph/x")
    _check_inner(x.shape[1], theta1.shape[0], "theorem_gnn x/theta1")
    _check_inner(theta1.shape[1], theta2.shape[0], "theorem_gnn theta1/theta2")
    p = normalize_rw(graph)
    act1, act2 = ad.ACTIVATIONS[sigma1], ad.ACTIVATIONS[sigma2]
    h = act1(ad.Tensor(np.asarray(p @ (x @ theta1)))).value
    return act2(ad.Tensor(np.asarray(p @ (h @ theta2)))).value


# --- differentiable building blocks -----------------------------------------------

def _act(name, x, trace):
    out = ad.ACTIVATIONS[name](x)
    if trace is not None and name == "relu":
        trace.append(ad.as_tensor(x).value > 0)
    return out


def _graph_layer(h, ops, thetas, sigma, trace=None, symmetric=False):
    """sigma(sum_s ops[s] @ h @ thetas[s]); ``None`` in ops means identity."""
    acc = None
    for op, theta in zip(ops, thetas):
        hw = ad.matmul(h, theta)
        term = hw if op is None else ad.spmm(op, hw, symmetric)
        acc = term if acc is None else ad.add(acc, term)
    return _act(sigma, acc, trace)


def _filter_bank(h, op, thetas, sigma, trace=None, symmetric=False):
    """Filter-bank layer, evaluating op^s h by repeated multiplication."""
    acc = None
    hs = ad.as_tensor(h)
    for s, theta in enumerate(thetas):
        if s > 0:
            hs = ad.spmm(op, hs, symmetric)
        term = ad.matmul(hs, theta)
        acc = term if acc is None else ad.add(acc, term)
    return _act(sigma, acc, trace)


def _phi(h, op, thetas, kind, sigma, trace=None):
    # only reached with normalize_sym operators, which are symmetric
    if kind == "gcn":
        return _graph_layer(h, [op], thetas[:1], sigma, trace, symmetric=True)
    return _filter_bank(h, op, thetas, sigma, trace, symmetric=True)


def _mlp(z, p, prefix, trace=None):
    hid = _act("relu", ad.add(ad.matmul(z, p[prefix + ".w1"]), p[prefix + ".b1"]), trace)
    return ad.add(ad.matmul(hid, p[prefix + ".w2"]), p[prefix + ".b2"])


# --- parameters ------------------------------------------------------------------

@dataclass
class ModelParams:
    """Named weight arrays of one model; ``alpha_scores`` holds the softmax pre-activations."""

    weights: dict

    def copy(self) -> "ModelParams":
        return ModelParams({k: v.copy() for k, v in self.weights.items()})

    def __getitem__(self, key):
        return self.weights[key]

    def keys(self):
        return self.weights.keys()

    def n_values(self) -> int:
        return sum(v.size for v in self.weights.values())

    def flat(self) -> np.ndarray:
        return np.concatenate([v.ravel() for v in self.weights.values()])


def _glorot(rng, fan_in, fan_out):
    lim = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-lim, lim, size=(fan_in, fan_out))


def _n_filters(config):
    return 1 if config.layer == "gcn" else config.order


def init_params(config: SgGnnConfig, n_features: int, n_classes: int, n_graphs: int = 1,
                n_nodes: int | None = None, rng=None) -> ModelParams:
    rng = np.random.default_rng(config.seed) if rng is None else rng
    s_count = _n_filters(config)
    w = {}
    if config.variant == "single":
        dims = [n_features] + [config.hidden] * (config.depth - 1) + [n_classes]
        for ell in range(config.depth):
            for s in range(s_count):
                w[f"layer{ell}.theta{s}"] = _glorot(rng, dims[ell], dims[ell + 1])
        return ModelParams(w)
    n_sg = config.depth if config.variant == "multilayer" else 1
    for ell in range(n_sg):
        in_dim = n_features if ell == 0 else config.hidden
        out_dim = n_classes if ell == n_sg - 1 else config.hidden
        for r in range(n_graphs):
            for s in range(s_count):
                w[f"branch{r}.layer{ell}.theta{s}"] = _glorot(rng, in_dim, config.hidden)
        w[f"mlp{ell}.w1"] = _glorot(rng, n_graphs * config.hidden, config.mlp_hidden)
        w[f"mlp{ell}.b1"] = np.zeros((1, config.mlp_hidden))
        w[f"mlp{ell}.w2"] = _glorot(rng, config.mlp_hidden, out_dim)
        w[f"mlp{ell}.b2"] = np.zeros((1, out_dim))
    if config.variant == "global_alpha":
        w["alpha_scores"] = np.zeros(n_graphs)
    elif config.variant == "node_alpha":
        if n_nodes is None:
            raise ValueError("node_alpha needs n_nodes to size its score matrix")
        w["alpha_scores"] = np.zeros((n_nodes, n_graphs))
    return ModelParams(w)


def decayed_keys(params: ModelParams):
    """Weight matrices subject to l2 decay: every theta and MLP weight, no biases or scores."""
    return [k for k in params.keys() if ".theta" in k or k.endswith(".w1") or k.endswith(".w2")]


# --- forward --------------------------------------------------------------------

def operators(bundle) -> list:
    graphs = [bundle] if isinstance(bundle, Graph) else list(bundle)
    return [normalize_sym(g) for g in graphs]


def _forward(x, ops, config, p, trace=None):
    """Logits as a Tensor; ``p`` maps names to Tensors."""
    s_count = _n_filters(config)
    if config.variant == "single":
        h = ad.as_tensor(x)
        for ell in range(config.depth):
            sigma = config.sigma if ell < config.depth - 1 else "identity"
            thetas = [p[f"layer{ell}.theta{s}"] for s in range(s_count)]
            h = _phi(h, ops[0], thetas, config.layer, sigma, trace)
        return h
    n_graphs = len(ops)
    n_sg = config.depth if config.variant == "multilayer" else 1
    h = ad.as_tensor(x)
    for ell in range(n_sg):
        branches = []
        for r, op in enumerate(ops):
            thetas = [p[f"branch{r}.layer{ell}.theta{s}"] for s in range(s_count)]
            branches.append(_phi(h, op, thetas, config.layer, config.sigma, trace))
        if config.variant == "global_alpha":
            alpha = ad.softmax(p["alpha_scores"])
            branches = [ad.mul(b, ad.item(alpha, r)) for r, b in enumerate(branches)]
        elif config.variant == "node_alpha":
            alpha = ad.softmax(p["alpha_scores"], axis=1)
            branches = [ad.mul(b, ad.column(alpha, r)) for r, b in enumerate(branches)]
        h = _mlp(ad.concat(branches) if n_graphs > 1 else branches[0], p, f"mlp{ell}", trace)
    return h


def _check_params(config, params, n_graphs, n_features):
    for k in params.keys():
        if k.startswith("branch"):
            r = int(k[len("branch"):].split(".")[0])
            if r >= n_graphs:
                raise ShapeMismatch(f"parameter {k} has no matching graph (bundle has {n_graphs})")
    needed = "layer0.theta0" if config.variant == "single" else "branch0.layer0.theta0"
    if needed not in params.weights:
        raise ShapeMismatch(f"parameters do not match variant {config.variant!r}")
    if params[needed].shape[0] != n_features:
        raise ShapeMismatch(f"first layer expects {params[needed].shape[0]} features, got {n_features}")
    if config.variant != "single" and f"branch{n_graphs - 1}.layer0.theta0" not in params.weights:
        raise ShapeMismatch(f"bundle has {n_graphs} graphs but parameters cover fewer")


def sg_forward(x, bundle, config: SgGnnConfig, params: ModelParams, ops=None) -> np.ndarray:
    """N x C logits of the configured model; argmax gives predictions."""
    x = np.asarray(x, dtype=np.float64)
    ops = operators(bundle) if ops is None else ops
    if ops[0].shape[0] != x.shape[0]:
        raise ShapeMismatch(f"bundle has {ops[0].shape[0]} nodes, features have {x.shape[0]} rows")
    _check_params(config, params, len(ops), x.shape[1])
    p = {k: ad.Tensor(v) for k, v in params.weights.items()}
    return _forward(x, ops, config, p).value


def alpha_weights(config: SgGnnConfig, params: ModelParams):
    """Softmax graph weights (length R, or N x R for node_alpha); None when the variant has none."""
    if "alpha_scores" not in params.weights:
        return None
    axis = 1 if config.variant == "node_alpha" else -1
    return ad.softmax(params["alpha_scores"], axis=axis).value


def loss_and_grad(x, labels, mask, ops, config, params: ModelParams, trace=None):
    """Training objective (masked cross-entropy + weight decay) and its gradient per parameter."""
    p = {k: ad.param(v) for k, v in params.weights.items()}
    logits = _forward(x, ops, config, p, trace)
    loss = ad.cross_entropy(logits, labels, mask)
    if config.weight_decay:
        reg = ad.scale(ad.sum_squares([p[k] for k in decayed_keys(params)]), 0.5 * config.weight_decay)
        loss = ad.add(loss, reg)
    loss.backward()
    grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.value)) for k, t in p.items()}
    return float(loss.value), grads, logits.value


# --- training ------------------------------------------------------------------------

def _accuracy(logits, labels, mask):
    if not mask.any():
        return float("nan")
    return float((logits[mask].argmax(axis=1) == labels[mask]).mean())


def train(dataset, bundle, config: SgGnnConfig, params: ModelParams | None = None):
    """Full-batch gradient descent; returns (best-validation params, per-epoch history).

    History rows hold the objective and accuracies at the parameters *before*
    that epoch's update; one extra final row reports the parameters after the
    last update. Selection uses validation accuracy, ties keep the earlier epoch.
    """
    y = np.asarray(dataset.labels)
    train_mask = np.asarray(dataset.train_mask)
    if not train_mask.any():
        raise EmptyTrainSet("training mask selects no nodes")
    missing = np.setdiff1d(np.arange(dataset.n_classes), np.unique(y[train_mask]))
    if len(missing):
        raise MissingClassInTrain(f"classes absent from the training set: {missing.tolist()}")
    bundle = bundle if isinstance(bundle, GraphBundle) else GraphBundle([bundle])
    if bundle.n_nodes != dataset.n_nodes:
        raise ShapeMismatch("bundle and dataset disagree on node count")
    ops = operators(bundle)
    x = np.asarray(dataset.features, dtype=np.float64)
    if params is None:
        params = init_params(config, x.shape[1], dataset.n_classes, len(bundle), dataset.n_nodes)
    else:
        params = params.copy()
    _check_params(config, params, len(ops), x.shape[1])
    val_mask, test_mask = np.asarray(dataset.val_mask), np.asarray(dataset.test_mask)
    history = []
    best, best_acc = params.copy(), -np.inf
    for epoch in range(config.epochs + 1):
        loss, grads, logits = loss_and_grad(x, y, train_mask, ops, config, params)
        val_acc = _accuracy(logits, y, val_mask)
        history.append({
            "epoch": epoch,
            "loss": loss,
            "train_acc": _accuracy(logits, y, train_mask),
            "val_acc": val_acc,
            "test_acc": _accuracy(logits, y, test_mask),
        })
        score = val_acc if val_mask.any() else -loss
        if score > best_acc:
            best, best_acc = params.copy(), score
        if epoch == config.epochs:
            break
        for k, g in grads.items():
            params.weights[k] = params.weights[k] - config.lr * g
    return best, history


def evaluate(dataset, bundle, config, params) -> dict:
    bundle = bundle if isinstance(bundle, GraphBundle) else GraphBundle([bundle])
    logits = sg_forward(dataset.features, bundle, config, params)
    y = dataset.labels
    return {name: _accuracy(logits, y, np.asarray(m)) for name, m in
            (("train_acc", dataset.train_mask), ("val_acc", dataset.val_mask),
             ("test_acc", dataset.test_mask))}


# --- gradient checking --------------------------------------------------------------

@dataclass
class GradCheckResult:
    max_rel_error: float
    n_checked: int
    n_skipped: int


REL_FLOOR = 1e-4


def finite_difference_check(loss_fn, params: dict, grads: dict, h=1e-5, signature=None):
    """Compare ``grads`` to central differences of ``loss_fn(params)``.

    Relative error per entry is |a - n| / max(|a| + |n|, REL_FLOOR). When
    ``signature`` is given (a function returning the ReLU activation pattern at
    a parameter point) entries whose +-h probes change that pattern straddle a
    kink and are skipped rather than compared.
    """
    base_sig = signature(params) if signature else None
    worst, checked, skipped = 0.0, 0, 0
    for k, v in params.items():
        for idx in np.ndindex(v.shape):
            orig = v[idx]
            v[idx] = orig + h
            f_plus = loss_fn(params)
            sig_plus = signature(params) if signature else None
            v[idx] = orig - h
            f_minus = loss_fn(params)
            sig_minus = signature(params) if signature else None
            v[idx] = orig
            if signature and not (_same(sig_plus, base_sig) and _same(sig_minus, base_sig)):
                skipped += 1
                continue
            num = (f_plus - f_minus) / (2 * h)
            ana = grads[k][idx]
            worst = max(worst, abs(ana - num) / max(abs(ana) + abs(num), REL_FLOOR))
            checked += 1
    return GradCheckResult(worst, checked, skipped)


def _same(a, b):
    return len(a) == len(b) and all(np.array_equal(u, v) for u, v in zip(a, b))


def random_instance(rng, n_nodes=10, n_features=4, n_classes=3, n_graphs=3, p_edge=0.35):
    """Small random dataset and bundle for gradient checks."""
    from .data import LabeledDataset

    graphs = []
    for _ in range(n_graphs):
        iu = np.triu_indices(n_nodes, k=1)
        keep = rng.random(len(iu[0])) < p_edge
        graphs.append(Graph.from_edges(n_nodes, np.column_stack([iu[0][keep], iu[1][keep]])))
    labels = np.concatenate([np.arange(n_classes), rng.integers(0, n_classes, n_nodes - n_classes)])
    labels = labels[rng.permutation(n_nodes)]
    train = np.zeros(n_nodes, dtype=bool)
    train[rng.permutation(n_nodes)[: n_nodes * 2 // 3]] = True
    for c in range(n_classes):
        train[np.flatnonzero(labels == c)[0]] = True
    ds = LabeledDataset(graphs[0], rng.normal(size=(n_nodes, n_features)), labels, train,
                        ~train, np.zeros(n_nodes, dtype=bool), name="random")
    return ds, GraphBundle(graphs)


def grad_check(config: SgGnnConfig, seed: int = 0, n_nodes: int = 10, n_graphs: int = 3,
               h: float = 1e-5) -> GradCheckResult:
    """Analytic gradients of the full objective versus central finite differences.

    Runs on a random instance with N <= 12; every parameter entry, including the
    softmax scores, is checked. Scores start away from zero so their gradient
    is exercised at a generic point.
    """
    if n_nodes > 12:
        raise ValueError("grad_check is meant for N <= 12")
    rng = np.random.default_rng(seed)
    n_graphs = 1 if config.variant == "single" else n_graphs
    ds, bundle = random_instance(rng, n_nodes=n_nodes, n_graphs=n_graphs)
    params = init_params(config, ds.features.shape[1], ds.n_classes, n_graphs, n_nodes, rng=rng)
    for k, v in params.weights.items():
        params.weights[k] = v + 0.3 * rng.normal(size=v.shape)
    ops = operators(bundle)
    x, y, m = ds.features, ds.labels, ds.train_mask

    def loss_fn(w):
        return loss_and_grad(x, y, m, ops, config, ModelParams(w))[0]

    def signature(w):
        trace = []
        loss_and_grad(x, y, m, ops, config, ModelParams(w), trace)
        return trace

    _, grads, _ = loss_and_grad(x, y, m, ops, config, params)
    return finite_difference_check(loss_fn, params.weights, grads, h, signature)


def preset(name: str, **overrides) -> SgGnnConfig:
    """Default configuration for a CLI model name (gcn, fbgnn, sg-global, sg-node, sg-multi)."""
    from .config import CLI_VARIANTS

    if name not in CLI_VARIANTS:
        raise ValueError(f"unknown model {name!r}; choose from {sorted(CLI_VARIANTS)}")
    variant, layer = CLI_VARIANTS[name]
    base = {"variant": variant, "depth": 2 if variant in ("single", "multilayer") else 1}
    if layer is not None:
        base["layer"] = layer
    base.update(overrides)
    if layer is not None:
        base["layer"] = layer
    return SgGnnConfig(**base)

