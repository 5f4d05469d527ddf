"""Google matrices of directed networks: generation, PageRank, spectra and
eigenvector localization statistics."""

__version__ = "0.1.0"

from .digraph import AbParams, DirectedGraph, ab_generate, degree_stats, load_edge_list  # noqa: E402
from .gmatrix import GoogleOperator, build_s, materialize_dense  # noqa: E402
from .pagerank import power_iterate  # noqa: E402
from .spectra import full_spectrum, eigenvectors  # noqa: E402
from .locstats import ipr, density_w, scaling_fit  # noqa: E402

__all__ = [
    "AbParams", "DirectedGraph", "ab_generate", "degree_stats", "load_edge_list",
    "GoogleOperator", "build_s", "materialize_dense", "power_iterate",
    "full_spectrum", "eigenvectors", "ipr", "density_w", "scaling_fit",
]
