"""File formats: dataset manifests, dotted-key config files, CSV matrices and reports."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attributes import AttributeMatrix, compute_attributes
from .data import LabeledDataset, stratified_split
from .errors import ConfigError, InconsistentNodeCount, ParseError
from .graph import Graph, read_edge_list

log = logging.getLogger(__name__)

CACHE_ENV = "SGGNN_CACHE_DIR"
ID_COLUMNS = ("node", "id", "node_id")


# --- dotted-key structured text ----------------------------------------------------

def parse_dotted(text: str, source="<string>") -> dict:
    """Parse ``a.b.c = value`` lines into nested dicts.

    Values are read as JSON literals when possible (numbers, booleans, lists,
    quoted strings) and as bare strings otherwise. ``#`` starts a comment.
    """
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(source, lineno, f"expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError(source, lineno, "empty key")
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ParseError(source, lineno, f"key {key!r} collides with a scalar")
        node[parts[-1]] = parsed
    return out


def read_dotted(path) -> dict:
    path = Path(path)
    return parse_dotted(path.read_text(), source=path)


def format_dotted(d: dict, prefix="") -> str:
    lines = []
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            lines.append(format_dotted(v, key + ".").rstrip("\n"))
        else:
            lines.append(f"{key} = {json.dumps(v)}")
    return "\n".join(line for line in lines if line) + "\n"


# --- CSV ---------------------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip text for floats so reruns are byte-identical."""
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (np.integer,)):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv_rows(path) -> tuple[list, list]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError(path, 1, "empty file")
    return rows[0], rows[1:]


def _is_number(s):
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_matrix_csv(path):
    """(column names, node ids or None, float matrix) from a CSV.

    A header row is used when the first row is not entirely numeric; a
    leading ``node``/``id`` column supplies node ids.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(path, 1, "empty file")
    header = None
    if not all(_is_number(c) for c in rows[0]):
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    ids = None
    if header and header[0].lower() in ID_COLUMNS:
        try:
            ids = np.array([int(r[0]) for r in rows], dtype=np.int64)
        except ValueError as exc:
            raise ParseError(path, 2, f"non-integer node id: {exc}") from None
        rows = [r[1:] for r in rows]
        header = header[1:]
    width = len(header) if header else (len(rows[0]) if rows else 0)
    values = np.empty((len(rows), width))
    for k, r in enumerate(rows):
        line = k + (2 if header else 1)
        if len(r) != width:
            raise ParseError(path, line, f"expected {width} columns, got {len(r)}")
        try:
            values[k] = [float(c) for c in r]
        except ValueError as exc:
            raise ParseError(path, line, str(exc)) from None
    if not np.isfinite(values).all():
        raise ParseError(path, 0, "non-finite value")
    names = header or [f"f{j}" for j in range(width)]
    return names, ids, values


def read_attribute_csv(path, n_nodes=None) -> AttributeMatrix:
    """Import precomputed node vectors (e.g. embeddings produced by other tools)."""
    names, ids, values = read_matrix_csv(path)
    if ids is not None:
        order = np.argsort(ids)
        ids, values = ids[order], values[order]
        if not np.array_equal(ids, np.arange(len(ids))):
            raise InconsistentNodeCount(f"{path}: node ids must be 0..N-1")
    if n_nodes is not None and len(values) != n_nodes:
        raise InconsistentNodeCount(f"{path}: {len(values)} rows for {n_nodes} nodes")
    return AttributeMatrix(values, tuple(names))


def write_attribute_csv(attrs: AttributeMatrix, path) -> Path:
    rows = ([i] + list(r) for i, r in enumerate(attrs.values))
    return write_csv(path, ["node"] + list(attrs.names), rows)


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# --- attribute cache ---------------------------------------------------------------

def graph_digest(g: Graph) -> str:
    h = hashlib.sha256()
    h.update(np.int64(g.n_nodes).tobytes())
    h.update(g.indptr.tobytes())
    h.update(g.indices.tobytes())
    return h.hexdigest()[:24]


def cached_attributes(g: Graph, kind: str) -> AttributeMatrix:
    """Raw (unstandardised) attributes, memoised on disk when SGGNN_CACHE_DIR is set."""
    cache = os.environ.get(CACHE_ENV)
    if not cache:
        return compute_attributes(g, kind)
    path = Path(cache) / f"{graph_digest(g)}_{kind}.npz"
    if path.exists():
        with np.load(path) as z:
            return AttributeMatrix(z["values"], tuple(str(s) for s in z["names"]))
    attrs = compute_attributes(g, kind)
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez(path, values=attrs.values, names=np.array(attrs.names))
    return attrs


# --- datasets ----------------------------------------------------------------------

@dataclass
class DatasetManifest:
    name: str
    edges: Path
    features: Path
    labels: Path
    splits: Path | None = None
    embeddings: dict = field(default_factory=dict)

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        path = Path(path)
        d = read_dotted(path)
        base = path.parent
        missing = [k for k in ("edges", "features", "labels") if k not in d]
        if missing:
            raise ConfigError(f"{path}: manifest lacks {missing}")

        def resolve(p):
            p = Path(str(p))
            return p if p.is_absolute() else base / p

        m = cls(
            name=str(d.get("name", path.stem)),
            edges=resolve(d["edges"]),
            features=resolve(d["features"]),
            labels=resolve(d["labels"]),
            splits=resolve(d["splits"]) if d.get("splits") else None,
            embeddings={k: resolve(v) for k, v in d.get("embeddings", {}).items()},
        )
        for p in [m.edges, m.features, m.labels, m.splits, *m.embeddings.values()]:
            if p is not None and not p.exists():
                raise ConfigError(f"{path}: referenced file {p} does not exist")
        return m

    def write(self, path) -> Path:
        path = Path(path)
        base = path.parent

        def rel(p):
            try:
                return str(Path(p).relative_to(base))
            except ValueError:
                return str(p)

        d = {"name": self.name, "edges": rel(self.edges), "features": rel(self.features),
             "labels": rel(self.labels)}
        if self.splits:
            d["splits"] = rel(self.splits)
        if self.embeddings:
            d["embeddings"] = {k: rel(v) for k, v in self.embeddings.items()}
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_dotted(d))
        return path


def _read_labels(path):
    """Labels CSV: ``node,label`` or a single ``label`` column; header optional."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ParseError(path, 1, "empty file")
    first = 1
    if rows[0][0].strip().lower() in ID_COLUMNS + ("label", "class", "y"):
        rows, first = rows[1:], 2
    ids, raw = [], []
    for k, r in enumerate(rows, first):
        if len(r) >= 2:
            try:
                ids.append(int(r[0]))
            except ValueError as exc:
                raise ParseError(path, k, str(exc)) from None
        raw.append(r[-1].strip())
    if ids and len(ids) != len(raw):
        raise ParseError(path, first, "mixed one- and two-column rows")
    return (np.array(ids, dtype=np.int64) if ids else None), raw


def _read_splits(path):
    header, rows = read_csv_rows(path)
    ids, kinds = [], []
    for k, r in enumerate(rows, 2):
        if len(r) < 2:
            raise ParseError(path, k, "expected 'node,split'")
        try:
            ids.append(int(r[0]))
        except ValueError as exc:
            raise ParseError(path, k, str(exc)) from None
        kind = r[1].strip().lower()
        if kind not in ("train", "val", "test", ""):
            raise ParseError(path, k, f"unknown split {kind!r}")
        kinds.append(kind)
    return np.array(ids, dtype=np.int64), kinds


def load_dataset(manifest, seed: int = 0, mapping_dir=None) -> LabeledDataset:
    """Read a manifest's edges, features, labels and optional splits.

    Labels are remapped densely to 0..C-1 in sorted order. Node ids that are
    not 0..N-1 are remapped in sorted order; the mapping is written to
    ``<name>.idmap.csv`` (in ``mapping_dir`` or next to the manifest) and a
    warning is logged. Without a split file a stratified 60/20/20 split is
    drawn from ``seed``.
    """
    if not isinstance(manifest, DatasetManifest):
        manifest = DatasetManifest.read(manifest)
    _, feat_ids, x = read_matrix_csv(manifest.features)
    label_ids, raw_labels = _read_labels(manifest.labels)
    _, edges = read_edge_list(manifest.edges)
    n = len(x)
    if len(raw_labels) != n:
        raise InconsistentNodeCount(
            f"{manifest.features} has {n} rows but {manifest.labels} has {len(raw_labels)}")
    ids = feat_ids if feat_ids is not None else np.arange(n)
    if len(np.unique(ids)) != n:
        raise InconsistentNodeCount(f"{manifest.features}: duplicate node ids")
    order = np.argsort(ids)
    ids_sorted = ids[order]
    x = x[order]
    if label_ids is not None:
        if not np.array_equal(np.sort(label_ids), ids_sorted):
            raise InconsistentNodeCount(f"{manifest.labels}: node ids differ from the feature file")
        raw_labels = [raw_labels[k] for k in np.argsort(label_ids)]
    else:
        raw_labels = [raw_labels[k] for k in order]
    remap = not np.array_equal(ids_sorted, np.arange(n))
    if remap:
        out_dir = Path(mapping_dir) if mapping_dir else manifest.features.parent
        map_path = write_csv(out_dir / f"{manifest.name}.idmap.csv", ["original_id", "node"],
                             zip(ids_sorted, range(n)))
        log.warning("%s: node ids are not 0..N-1; remapped, mapping written to %s",
                    manifest.name, map_path)
    pos = {int(v): k for k, v in enumerate(ids_sorted)}
    if edges.size:
        unknown = sorted({int(v) for v in edges.ravel()} - set(pos))
        if unknown:
            raise InconsistentNodeCount(
                f"{manifest.edges}: edges reference ids absent from the features: {unknown[:5]}")
        edges = np.vectorize(pos.__getitem__)(edges) if remap else edges
    g = Graph.from_edges(n, edges)
    if all(_is_number(s) for s in raw_labels):
        keys = sorted({float(s) for s in raw_labels})
        labels = np.array([keys.index(float(s)) for s in raw_labels], dtype=np.int64)
    else:
        keys = sorted(set(raw_labels))
        labels = np.array([keys.index(s) for s in raw_labels], dtype=np.int64)
    if manifest.splits is not None:
        sid, kinds = _read_splits(manifest.splits)
        masks = {k: np.zeros(n, dtype=bool) for k in ("train", "val", "test")}
        for i, kind in zip(sid, kinds):
            if int(i) not in pos:
                raise InconsistentNodeCount(f"{manifest.splits}: unknown node id {i}")
            if kind:
                masks[kind][pos[int(i)]] = True
        train, val, test = masks["train"], masks["val"], masks["test"]
    else:
        train, val, test = stratified_split(labels, seed)
    return LabeledDataset(g, x, labels, train, val, test, name=manifest.name)


def write_dataset(ds: LabeledDataset, directory, name=None, with_splits=True) -> Path:
    """Write edges/features/labels(/splits) plus a manifest; returns the manifest path."""
    directory = Path(directory)
    name = name or ds.name
    directory.mkdir(parents=True, exist_ok=True)
    from .graph import write_edge_list

    edges = directory / f"{name}.edges"
    write_edge_list(ds.graph, edges)
    feats = write_csv(directory / f"{name}.features.csv",
                      ["node"] + [f"x{j}" for j in range(ds.features.shape[1])],
                      ([i] + list(r) for i, r in enumerate(ds.features)))
    labels = write_csv(directory / f"{name}.labels.csv", ["node", "label"],
                       enumerate(ds.labels))
    splits = None
    if with_splits:
        kind = np.where(ds.train_mask, "train", np.where(ds.val_mask, "val",
                                                         np.where(ds.test_mask, "test", "")))
        splits = write_csv(directory / f"{name}.splits.csv", ["node", "split"], enumerate(kind))
    return DatasetManifest(name, edges, feats, labels, splits).write(directory / f"{name}.manifest")
