"""Structure-guided neighbour discovery and multi-graph GNNs for heterophilic node classification."""

from .graph import Graph, laplacian_eig, normalize_rw, normalize_sym
from .data import LabeledDataset
from .config import SgGnnConfig, TOL

__version__ = "0.1.0"

__all__ = ["Graph", "LabeledDataset", "SgGnnConfig", "TOL", "laplacian_eig",
           "normalize_rw", "normalize_sym"]
