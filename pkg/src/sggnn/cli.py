"""Command-line entry point: ``sggnn <subcommand> ...``.

Exit codes: 0 success, 1 invalid input or configuration, 2 internal failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from .config import GraphRecipe
from .discovery import GraphBundle
from .errors import SgGnnError
from .graph import load_edge_list, write_edge_list

log = logging.getLogger("sggnn")


def _dataset(args):
    from .io import load_dataset

    return load_dataset(args.dataset, seed=args.seed)


def _dataset_name(path):
    from .io import DatasetManifest

    return DatasetManifest.read(path).name


# --- subcommands -----------------------------------------------------------------

def cmd_attributes(args):
    from .attributes import standardize
    from .io import cached_attributes, write_attribute_csv

    if args.dataset:
        g = _dataset(args).graph
    elif not args.edges:
        raise SgGnnError("give --dataset or --edges")
    else:
        g = load_edge_list(args.edges, n_nodes=args.n_nodes)
    attrs = cached_attributes(g, args.kind)
    if args.standardize:
        attrs = standardize(attrs)
    write_attribute_csv(attrs, args.out)
    print(f"wrote {attrs.values.shape[0]} x {attrs.values.shape[1]} attributes to {args.out}")


def cmd_discover(args):
    from .pipeline import build_graph

    ds = _dataset(args)
    recipe = GraphRecipe(source=args.source, method=args.method, k=args.k, eps=args.eps,
                         eps_quantile=args.eps_quantile, standardize=not args.no_standardize)
    g = build_graph(recipe, ds)
    out = Path(args.out_dir) / f"{_dataset_name(args.dataset)}_{recipe.name}.edges"
    out.parent.mkdir(parents=True, exist_ok=True)
    write_edge_list(g, out)
    print(f"wrote {g.n_edges} edges to {out}")


def _named_graphs(ds, paths, include_original=True):
    graphs, names = [], []
    if include_original:
        graphs.append(ds.graph)
        names.append("original")
    for p in paths or []:
        graphs.append(load_edge_list(p, n_nodes=ds.n_nodes))
        names.append(Path(p).stem)
    return GraphBundle(graphs, names)


def cmd_metrics(args):
    from .io import write_csv
    from .pipeline import METRIC_COLUMNS, hist_header, metrics_rows

    ds = _dataset(args)
    bundle = _named_graphs(ds, args.graphs, include_original=not args.no_original)
    rows, hist = metrics_rows(ds.name, bundle, ds.labels)
    write_csv(args.out, ("dataset", "graph", "n_edges") + METRIC_COLUMNS, rows)
    if args.hist:
        write_csv(args.hist, hist_header(), hist)
    for r in rows:
        print(",".join(str(v) for v in r[1:]))


def cmd_train(args):
    from .gnn import alpha_weights, evaluate, preset, train
    from .io import read_dotted, write_csv
    from .pipeline import HISTORY_COLUMNS, write_alpha_csv

    ds = _dataset(args)
    overrides = read_dotted(args.config) if args.config else {}
    overrides = overrides.get("model", overrides)
    if args.epochs is not None:
        overrides["epochs"] = args.epochs
    if args.lr is not None:
        overrides["lr"] = args.lr
    if args.variant in ("sg-global", "sg-node"):
        overrides.pop("depth", None)
    overrides.pop("variant", None)
    cfg = preset(args.variant, **{**overrides, "seed": args.seed})
    if args.graphs:
        bundle = _named_graphs(ds, args.graphs, include_original=args.with_original)
    else:
        bundle = _named_graphs(ds, [])
    if cfg.variant == "single" and len(bundle) > 1:
        raise SgGnnError(f"{args.variant} trains on one graph; got {len(bundle)}")
    params, history = train(ds, bundle, cfg)
    acc = evaluate(ds, bundle, cfg, params)
    out = Path(args.out_dir)
    write_csv(out / f"{args.variant}_seed{args.seed}_history.csv", HISTORY_COLUMNS,
              ([h[c] for c in HISTORY_COLUMNS] for h in history))
    alpha = alpha_weights(cfg, params)
    if alpha is not None:
        write_alpha_csv(out / f"{args.variant}_seed{args.seed}_alpha.csv", alpha, bundle.names)
    print(f"test_acc={acc['test_acc']!r} val_acc={acc['val_acc']!r} train_acc={acc['train_acc']!r}")


def cmd_verify(args):
    from . import theory
    from .graph import Graph
    from .io import write_csv

    rows = []
    if args.check == "theorem1":
        header = ("seed", "n", "c", "lhs", "rhs", "satisfied", "z_star_recovers")
        for seed in range(args.seed, args.seed + args.seeds):
            x, g, y, t1, t2 = theory.random_theorem_instance(seed)
            rep = theory.theorem1_check(x, g, y, t1, t2)
            rows.append([seed, g.n_nodes, len(np.unique(y)), rep.lhs, rep.rhs, rep.satisfied,
                         rep.flags["z_star_recovers"]])
        bad = sum(not r[5] for r in rows)
    elif args.check in ("prop1", "prop2"):
        fn = theory.prop1_verify if args.check == "prop1" else theory.prop2_verify
        header = ("n", "c", "q", "r", "trials", "empirical", "bound", "sigma", "slack_sigmas",
                  "consistent")
        for n in args.n:
            for c in args.c:
                for q in args.q:
                    for r in args.r:
                        rep = fn(n, c, q, r, trials=args.trials, seed=args.seed, p_intra=args.p_intra)
                        rows.append([n, c, q, r, rep.trials, rep.empirical, rep.lower_bound,
                                     rep.sigma, rep.slack_sigmas, rep.consistent()])
        bad = sum(not r[-1] for r in rows)
    else:
        header = ("seed", "n", "depth", "lhs", "rhs", "satisfied")
        for seed in range(args.seed, args.seed + args.seeds):
            rng = np.random.default_rng(seed)
            for n in args.n:
                iu = np.triu_indices(n, k=1)
                keep = rng.random(len(iu[0])) < args.p
                g = Graph.from_edges(n, np.column_stack([iu[0][keep], iu[1][keep]]))
                x = rng.normal(size=n)
                for depth in args.depth:
                    rep = theory.spectral_tv_check(g, x, depth)
                    rows.append([seed, n, depth, rep.lhs, rep.rhs, rep.satisfied])
        bad = sum(not r[-1] for r in rows)
    if args.out:
        write_csv(args.out, header, rows)
    print(f"{args.check}: {len(rows)} rows, {bad} failing")
    return 1 if bad else 0


def cmd_run(args):
    from .pipeline import load_run_config, run_experiment

    cfg = load_run_config(args.config)
    out = run_experiment(cfg, workers=args.parallel)
    print(f"results in {out}")


def cmd_report(args):
    from .pipeline import report

    out = report(args.inputs, args.out)
    print(Path(out).read_text(), end="")


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sggnn", description="Structural-graph GNN toolkit.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def dataset_args(s, required=True):
        s.add_argument("--dataset", required=required, help="dataset manifest file")
        s.add_argument("--seed", type=int, default=0, help="split seed when no split file exists")

    s = sub.add_parser("attributes", help="compute structural node attributes")
    dataset_args(s, required=False)
    s.add_argument("--edges", help="edge list, used when --dataset is absent")
    s.add_argument("--n-nodes", type=int)
    s.add_argument("--kind", choices=("role", "global", "both"), default="both")
    s.add_argument("--standardize", action="store_true")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_attributes)

    s = sub.add_parser("discover", help="build a k-NN or eps-ball graph from attributes")
    dataset_args(s)
    s.add_argument("--source", default="global",
                   help="role|global|both|features|file:<csv>|embedding:<name>")
    s.add_argument("--method", choices=("knn", "ball"), default="knn")
    s.add_argument("--k", type=int, default=3)
    eps = s.add_mutually_exclusive_group()
    eps.add_argument("--eps", type=float)
    eps.add_argument("--eps-quantile", type=float, default=0.02)
    s.add_argument("--no-standardize", action="store_true")
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_discover)

    s = sub.add_parser("metrics", help="homophily metrics for the original and extra graphs")
    dataset_args(s)
    s.add_argument("--graphs", nargs="*", help="extra edge lists over the same nodes")
    s.add_argument("--no-original", action="store_true")
    s.add_argument("--out", required=True)
    s.add_argument("--hist", help="write the 10-bin node homophily histogram here")
    s.set_defaults(func=cmd_metrics)

    s = sub.add_parser("train", help="train one model")
    dataset_args(s)
    s.add_argument("--variant", choices=("gcn", "fbgnn", "sg-global", "sg-node", "sg-multi"),
                   required=True)
    s.add_argument("--graphs", nargs="*", help="ordered edge lists (default: the dataset graph)")
    s.add_argument("--with-original", action="store_true",
                   help="prepend the dataset graph to --graphs")
    s.add_argument("--config", help="dotted-key file of model settings")
    s.add_argument("--epochs", type=int)
    s.add_argument("--lr", type=float)
    s.add_argument("--out-dir", default=".")
    s.set_defaults(func=cmd_train)

    s = sub.add_parser("verify", help="numerical checks of the theoretical results")
    s.add_argument("--check", choices=("theorem1", "prop1", "prop2", "spectral"), required=True)
    s.add_argument("--n", type=int, nargs="+", default=[12])
    s.add_argument("--c", type=int, nargs="+", default=[2])
    s.add_argument("--q", type=float, nargs="+", default=[0.01])
    s.add_argument("--r", type=int, nargs="+", default=[1, 2, 4, 8])
    s.add_argument("--trials", type=int, default=5000)
    s.add_argument("--p-intra", type=float, default=0.3)
    s.add_argument("--depth", type=int, nargs="+", default=[1, 2, 3])
    s.add_argument("--p", type=float, default=0.4, help="edge probability for spectral graphs")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--seeds", type=int, default=100, help="instances for theorem1/spectral")
    s.add_argument("--out")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("run", help="full pipeline from a run configuration")
    s.add_argument("--config", required=True)
    s.add_argument("--parallel", type=int, default=1, help="worker processes across seeds")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("report", help="merge per-seed accuracy CSVs into a summary")
    s.add_argument("inputs", nargs="+", help="accuracy_per_seed.csv files or run directories")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return int(args.func(args) or 0)
    except (SgGnnError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - anything else is a bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
