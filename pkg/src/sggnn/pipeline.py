"""Experiment orchestration: recipes -> graphs -> metrics -> training -> reports.

Every output is a plain-text file written in a fixed order with shortest
round-trip float formatting, so re-running a configuration reproduces each
byte. The run manifest lists every artifact with its SHA-256.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attributes import AttributeMatrix, standardize
from .config import CLI_VARIANTS, GraphRecipe, RunConfig
from .data import LabeledDataset
from .discovery import GraphBundle, discover
from .errors import ConfigError, SgGnnError
from .gnn import alpha_weights, evaluate, preset, train
from .graph import Graph, write_edge_list
from .homophily import HIST_BINS, homophily_report
from .io import (DatasetManifest, cached_attributes, format_dotted, load_dataset,
                 read_attribute_csv, read_csv_rows, read_dotted, sha256, write_csv)

METRIC_COLUMNS = ("tv", "tv_per_node", "edge_homophily", "fp_norm", "q_hat")
HISTORY_COLUMNS = ("epoch", "loss", "train_acc", "val_acc", "test_acc")
PER_SEED_COLUMNS = ("dataset", "model", "seed", "best_epoch", "train_acc", "val_acc", "test_acc")
SUMMARY_COLUMNS = ("dataset", "model", "n_seeds", "mean_test_acc", "stderr_test_acc",
                   "mean_val_acc", "table")


# --- configuration -------------------------------------------------------------------

def load_run_config(path) -> RunConfig:
    """Read a dotted-key run file. Relative paths resolve against the file's directory.

    Schema::

        dataset = "texas.manifest"
        output = "runs/texas"
        seeds = [0, 1, 2]
        include_original = true
        models = ["gcn", "sg-global"]          # "gcn@<graph>" trains on one named graph
        model.lr = 0.01                          # overrides for every model preset
        recipe.<label>.source = "global"         # role|global|both|features|file:<csv>|embedding:<name>
        recipe.<label>.method = "knn"            # knn|ball
        recipe.<label>.k = 3
        recipe.<label>.eps_quantile = 0.02
        recipe.<label>.standardize = true
    """
    path = Path(path)
    d = read_dotted(path)
    base = path.parent
    known = {"dataset", "output", "seeds", "include_original", "models", "model", "recipe"}
    unknown = set(d) - known
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    if "dataset" not in d:
        raise ConfigError(f"{path}: 'dataset' is required")

    def resolve(p):
        p = Path(str(p))
        return str(p if p.is_absolute() else base / p)

    recipes = []
    for label, spec in d.get("recipe", {}).items():
        if not isinstance(spec, dict):
            raise ConfigError(f"{path}: recipe.{label} must be a group of keys")
        spec = dict(spec)
        if str(spec.get("source", "")).startswith("file:"):
            spec["source"] = "file:" + resolve(spec["source"][len("file:"):])
        try:
            recipes.append(GraphRecipe(**spec))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: recipe.{label}: {exc}") from None
    seeds = d.get("seeds", [0])
    seeds = [seeds] if isinstance(seeds, int) else seeds
    models = d.get("models", [])
    models = [models] if isinstance(models, str) else models
    try:
        cfg = RunConfig(
            manifest=resolve(d["dataset"]),
            recipes=tuple(recipes),
            models=tuple(models),
            model=dict(d.get("model", {})),
            seeds=tuple(int(s) for s in seeds),
            output=resolve(d.get("output", "runs/out")),
            include_original=bool(d.get("include_original", True)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    for m in cfg.models:
        model_config(m, cfg.model, 0)
    return cfg


def dump_run_config(cfg: RunConfig) -> str:
    # the output location is deliberately left out: it does not change any result
    d = {"dataset": cfg.manifest, "seeds": list(cfg.seeds),
         "include_original": cfg.include_original, "models": list(cfg.models)}
    if cfg.model:
        d["model"] = dict(cfg.model)
    d["recipe"] = {r.name: {"source": r.source, "method": r.method, "k": r.k, "eps": r.eps,
                            "eps_quantile": r.eps_quantile, "standardize": r.standardize}
                   for r in cfg.recipes}
    return format_dotted(d)


def split_model_name(name: str):
    """``gcn@role_knn`` -> (``gcn``, ``role_knn``); plain names target the default graph."""
    base, _, graph = name.partition("@")
    if base not in CLI_VARIANTS:
        raise ConfigError(f"unknown model {base!r}; choose from {sorted(CLI_VARIANTS)}")
    if graph and CLI_VARIANTS[base][0] != "single":
        raise ConfigError(f"{name}: only single-graph models take an @graph suffix")
    return base, graph or None


def model_config(name: str, overrides: dict, seed: int):
    base, _ = split_model_name(name)
    over = dict(overrides)
    if CLI_VARIANTS[base][0] in ("global_alpha", "node_alpha"):
        over.pop("depth", None)
    over.pop("variant", None)
    try:
        return preset(base, **over, seed=seed)
    except TypeError as exc:
        raise ConfigError(f"model overrides: {exc}") from None


# --- graphs ---------------------------------------------------------------------

def recipe_attributes(recipe: GraphRecipe, ds: LabeledDataset, manifest=None) -> AttributeMatrix:
    src = recipe.source
    if src in ("role", "global", "both"):
        attrs = cached_attributes(ds.graph, src)
    elif src == "features":
        x = np.asarray(ds.features)
        attrs = AttributeMatrix(x, tuple(f"x{j}" for j in range(x.shape[1])))
    elif src.startswith("file:"):
        attrs = read_attribute_csv(src[len("file:"):], n_nodes=ds.n_nodes)
    else:
        name = src[len("embedding:"):]
        if manifest is None or name not in manifest.embeddings:
            raise ConfigError(f"dataset has no embedding named {name!r}")
        attrs = read_attribute_csv(manifest.embeddings[name], n_nodes=ds.n_nodes)
    return standardize(attrs) if recipe.standardize else attrs


def build_graph(recipe: GraphRecipe, ds: LabeledDataset, manifest=None) -> Graph:
    try:
        attrs = recipe_attributes(recipe, ds, manifest)
        return discover(attrs, recipe.method, recipe.k, recipe.eps, recipe.eps_quantile)
    except (SgGnnError, ValueError) as exc:
        raise ConfigError(f"recipe {recipe.name!r}: {exc}") from exc


def build_bundle(ds: LabeledDataset, recipes, include_original=True, manifest=None) -> GraphBundle:
    graphs, names = [], []
    if include_original:
        graphs.append(ds.graph)
        names.append("original")
    for r in recipes:
        graphs.append(build_graph(r, ds, manifest))
        names.append(r.name)
    return GraphBundle(graphs, names)


def metrics_rows(dataset_name: str, bundle: GraphBundle, labels):
    """(metrics rows, histogram rows) in bundle order."""
    rows, hist = [], []
    for name, g in zip(bundle.names, bundle.graphs):
        rep = homophily_report(g, labels)
        r = rep.row()
        rows.append([dataset_name, name, g.n_edges] + [r[c] for c in METRIC_COLUMNS])
        hist.append(list(rep.histogram))
    return rows, hist


def hist_header(bins=HIST_BINS):
    """Bin labels ``0.0-0.1`` ... ``0.9-1.0``; bins are right-open except the last."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    return [f"{a:.1f}-{b:.1f}" for a, b in zip(edges[:-1], edges[1:])]


# --- training -------------------------------------------------------------------------

@dataclass
class ModelRun:
    model: str
    seed: int
    best_epoch: int
    accuracy: dict
    history: list
    alpha: np.ndarray | None


def fit_model(name: str, ds: LabeledDataset, bundle: GraphBundle, overrides: dict, seed: int) -> ModelRun:
    base, graph_name = split_model_name(name)
    cfg = model_config(name, overrides, seed)
    if cfg.variant == "single":
        target = graph_name or bundle.names[0]
        if target not in bundle.names:
            raise ConfigError(f"{name}: no graph named {target!r} (have {list(bundle.names)})")
        members = GraphBundle([bundle[bundle.names.index(target)]], [target])
    else:
        members = bundle
    params, history = train(ds, members, cfg)
    acc = evaluate(ds, members, cfg, params)
    # train() keeps the earliest epoch reaching the best validation accuracy
    vals = [h["val_acc"] for h in history]
    best_epoch = int(np.nanargmax(vals)) if ds.val_mask.any() else int(np.argmin([h["loss"] for h in history]))
    return ModelRun(name, seed, best_epoch, acc, history, alpha_weights(cfg, params))


def _seed_cell(args):
    manifest, seed, models, overrides, recipes, include_original = args
    m = DatasetManifest.read(manifest)
    ds = load_dataset(m, seed=seed)
    bundle = build_bundle(ds, recipes, include_original, m)
    return [fit_model(name, ds, bundle, overrides, seed) for name in models]


# --- aggregation ---------------------------------------------------------------------

def mean_stderr(values):
    """Mean and standard error (sample std / sqrt(n)); stderr is 0 for a single value."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        return float("nan"), float("nan")
    if len(v) == 1:
        return float(v[0]), 0.0
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v)))


def summarize(per_seed_rows):
    """Group ``(dataset, model, seed, best_epoch, train, val, test)`` rows into summary rows."""
    groups: dict = {}
    for r in per_seed_rows:
        groups.setdefault((r[0], r[1]), []).append(r)
    out = []
    for (dataset, model), rows in groups.items():
        test = [float(r[6]) for r in rows]
        val = [float(r[5]) for r in rows]
        m, se = mean_stderr(test)
        out.append([dataset, model, len(rows), m, se, float(np.mean(val)),
                    f"{100 * m:.2f} ± {100 * se:.2f}"])
    return out


# --- orchestration -----------------------------------------------------------------

def run_experiment(cfg: RunConfig, workers: int = 1) -> Path:
    """Run a full experiment and return the output directory.

    With ``workers > 1`` seeds train in separate processes; results are merged
    in seed order, so the files are identical to a serial run.
    """
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    manifest = DatasetManifest.read(cfg.manifest)
    name = manifest.name
    written = []

    written.append(_write_text(out / "config.resolved", dump_run_config(cfg)))

    # graphs and metrics do not depend on the split, so they are built once
    ds0 = load_dataset(manifest, seed=cfg.seeds[0])
    bundle = build_bundle(ds0, cfg.recipes, cfg.include_original, manifest)
    for gname, g in zip(bundle.names, bundle.graphs):
        if gname == "original":
            continue
        p = out / "graphs" / f"{name}_{gname}.edges"
        p.parent.mkdir(parents=True, exist_ok=True)
        write_edge_list(g, p)
        written.append(p)
    rows, hist = metrics_rows(name, bundle, ds0.labels)
    written.append(write_csv(out / "metrics.csv", ("dataset", "graph", "n_edges") + METRIC_COLUMNS, rows))
    written.append(write_csv(out / "node_homophily_hist.csv", hist_header(), hist))

    if cfg.models:
        cells = [(str(cfg.manifest), s, tuple(cfg.models), dict(cfg.model), cfg.recipes,
                  cfg.include_original) for s in cfg.seeds]
        if workers > 1 and len(cells) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(_seed_cell, cells))
        else:
            results = [_seed_cell(c) for c in cells]
        per_seed = []
        for runs in results:
            for run in runs:
                written.extend(_write_model_run(out, run, bundle.names))
                per_seed.append([name, run.model, run.seed, run.best_epoch,
                                 run.accuracy["train_acc"], run.accuracy["val_acc"],
                                 run.accuracy["test_acc"]])
        written.append(write_csv(out / "accuracy_per_seed.csv", PER_SEED_COLUMNS, per_seed))
        written.append(write_csv(out / "accuracy_summary.csv", SUMMARY_COLUMNS, summarize(per_seed)))

    files = {str(p.relative_to(out)): sha256(p) for p in sorted(written)}
    _write_text(out / "manifest.json", json.dumps({"dataset": name, "files": files},
                                                  indent=2, sort_keys=True) + "\n")
    return out


def _safe(model: str) -> str:
    return model.replace("@", "_at_")


def _write_model_run(out: Path, run: ModelRun, graph_names):
    d = out / f"seed{run.seed}"
    paths = [write_csv(d / f"{_safe(run.model)}_history.csv", HISTORY_COLUMNS,
                       ([h[c] for c in HISTORY_COLUMNS] for h in run.history))]
    if run.alpha is not None:
        paths.append(write_alpha_csv(d / f"{_safe(run.model)}_alpha.csv", run.alpha, graph_names))
    return paths


def write_alpha_csv(path, alpha, graph_names) -> Path:
    """Global weights as ``graph,alpha`` rows; node weights as one row per node."""
    alpha = np.asarray(alpha)
    if alpha.ndim == 1:
        return write_csv(path, ("graph", "alpha"), zip(graph_names, alpha))
    return write_csv(path, ("node",) + tuple(graph_names),
                     ([i] + list(row) for i, row in enumerate(alpha)))


def _write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)
    return path


# --- report ----------------------------------------------------------------------

def report(inputs, output) -> Path:
    """Merge per-seed accuracy CSVs (files or run directories) into one summary table."""
    rows = []
    for item in inputs:
        p = Path(item)
        p = p / "accuracy_per_seed.csv" if p.is_dir() else p
        header, body = read_csv_rows(p)
        if tuple(header) != PER_SEED_COLUMNS:
            raise ConfigError(f"{p}: expected columns {PER_SEED_COLUMNS}, got {tuple(header)}")
        rows.extend(body)
    seen, unique = set(), []
    for r in rows:
        key = (r[0], r[1], r[2])
        if key in seen:
            raise ConfigError(f"duplicate result for dataset={r[0]} model={r[1]} seed={r[2]}")
        seen.add(key)
        unique.append(r)
    unique.sort(key=lambda r: (r[0], r[1], int(r[2])))
    return write_csv(output, SUMMARY_COLUMNS, summarize(unique))


__all__ = ["load_run_config", "dump_run_config", "build_bundle", "build_graph", "metrics_rows",
           "fit_model", "run_experiment", "report", "summarize", "mean_stderr", "write_alpha_csv",
           "hist_header"]
