"""Configuration records: numerical tolerances, size caps and model settings."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace


@dataclass(frozen=True)
class Tolerances:
    """Numerical constants shared by every module."""

    eig_cap: int = 2000
    distance_cap: int = 20_000
    # reconstruction residual of the Laplacian eigendecomposition, relative to ||L||_F
    eig_residual: float = 1e-8
    eig_slack: float = 1e-9
    row_sum: float = 1e-12
    power_tol: float = 1e-10
    power_max_iter: int = 10_000
    pagerank_damping: float = 0.85
    katz_fraction: float = 0.9
    standardize_zero: float = 1e-12
    recover_within: float = 1e-12
    recover_between: float = 1e-9
    bound_violation: float = 1e-9


TOL = Tolerances()

VARIANTS = ("single", "global_alpha", "node_alpha", "multilayer")
LAYER_KINDS = ("gcn", "fbgnn")
NONLINEARITIES = ("relu", "identity")

# CLI names for the five trainable models
CLI_VARIANTS = {
    "gcn": ("single", "gcn"),
    "fbgnn": ("single", "fbgnn"),
    "sg-global": ("global_alpha", None),
    "sg-node": ("node_alpha", None),
    "sg-multi": ("multilayer", None),
}


@dataclass(frozen=True)
class LayerSpec:
    kind: str = "gcn"
    in_dim: int = 1
    out_dim: int = 1
    order: int = 2
    sigma: str = "relu"

    def __post_init__(self):
        if self.kind not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.kind!r}")
        if self.sigma not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.sigma!r}")
        if self.in_dim < 1 or self.out_dim < 1:
            raise ValueError("layer dims must be >= 1")
        if not 1 <= self.order <= 5:
            raise ValueError("filter order must lie in 1..5")


@dataclass(frozen=True)
class SgGnnConfig:
    """Model and optimiser settings.

    ``variant`` is one of ``single`` (plain GCN/FBGNN stack on the first graph),
    ``global_alpha``, ``node_alpha`` or ``multilayer``. ``depth`` counts graph
    layers: for ``single`` it is the number of stacked graph layers, for the
    SG variants it is the number of SG layers (always 1 for the alpha variants).
    """

    variant: str = "global_alpha"
    layer: str = "gcn"
    depth: int = 1
    hidden: int = 64
    mlp_hidden: int = 64
    order: int = 2
    sigma: str = "relu"
    lr: float = 1e-2
    weight_decay: float = 5e-4
    epochs: int = 500
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.layer not in LAYER_KINDS:
            raise ValueError(f"unknown layer kind {self.layer!r}")
        if self.sigma not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.sigma!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        if self.variant in ("global_alpha", "node_alpha") and self.depth != 1:
            raise ValueError("alpha-weighted variants are single-layer; use multilayer for depth > 1")
        if not 1 <= self.order <= 5:
            raise ValueError("filter order must lie in 1..5")
        if self.hidden < 1 or self.mlp_hidden < 1 or self.epochs < 0:
            raise ValueError("hidden sizes must be >= 1 and epochs >= 0")

    def with_(self, **changes) -> "SgGnnConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "SgGnnConfig":
        known = {f.name: f.type for f in fields(cls)}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown model keys: {sorted(unknown)}")
        return cls(**d)


SOURCES = ("role", "global", "both", "features")
METHODS = ("knn", "ball")


@dataclass(frozen=True)
class GraphRecipe:
    """One alternative graph: attribute source x construction method.

    ``source`` is ``role``, ``global``, ``both``, ``features``, ``file:<csv>``
    (precomputed attributes) or ``embedding:<name>`` (a manifest embedding).
    """

    source: str = "global"
    method: str = "knn"
    k: int = 3
    eps: float | None = None
    eps_quantile: float = 0.02
    standardize: bool = True

    def __post_init__(self):
        if not (self.source in SOURCES or self.source.startswith(("file:", "embedding:"))):
            raise ValueError(f"unknown attribute source {self.source!r}")
        if self.method not in METHODS:
            raise ValueError(f"unknown discovery method {self.method!r}")

    @property
    def name(self) -> str:
        src = self.source
        if src.startswith("file:"):
            src = src[len("file:"):].replace("\\", "/").rsplit("/", 1)[-1].rsplit(".", 1)[0]
        elif src.startswith("embedding:"):
            src = src[len("embedding:"):]
        return f"{src}_{self.method}"


@dataclass(frozen=True)
class RunConfig:
    """A full experiment: one dataset, its graph recipes, models and seeds.

    ``model`` holds overrides applied on top of each model's preset;
    ``depth`` is ignored by the single-layer alpha variants.
    """

    manifest: str = ""
    recipes: tuple = ()
    models: tuple = ()
    model: dict = field(default_factory=dict)
    seeds: tuple = (0,)
    output: str = "runs/out"
    include_original: bool = True

    def __post_init__(self):
        if not self.recipes:
            raise ValueError("a run needs at least one graph recipe")
        if not self.seeds:
            raise ValueError("a run needs at least one seed")
        names = [r.name for r in self.recipes]
        if len(set(names)) != len(names):
            raise ValueError(f"graph recipes must have distinct names, got {names}")
