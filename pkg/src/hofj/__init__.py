"""Higher-order Friedkin-Johnsen opinion dynamics.

Exact equilibria on random-walk matrix polynomials, a path-sampling
sparsifier for the polynomial Laplacian, and the iterative approximator
that runs on top of it.
"""

__version__ = "0.1.0"

from .graph_core import (
    EdgeListError,
    WeightedGraph,
    derive_rng,
    largest_connected_component,
    load_edge_list,
    random_walk,
    sample_neighbor,
)
from .polynomial import (
    DenseOperator,
    DenseSizeError,
    OpinionState,
    PolynomialSpec,
    build_polynomial_laplacian,
    build_transition_polynomial,
    mean_absolute_error,
    solve_equilibrium_exact,
)
from .sparsifier import (
    SampledPath,
    SparsifierConfig,
    SparsifierOutput,
    build_sparsifier,
    path_sample,
    singular_gap_estimate,
    spectral_similarity_check,
)
from .dynamics import (
    ErrorBoundInputs,
    IterationConfig,
    SparseTransition,
    build_sparse_transition,
    contraction_check,
    iterate_opinions,
    theorem9_bound,
)
from .opinions import GenSpec, generate_innate, generate_resistance

__all__ = [
    "DenseOperator",
    "DenseSizeError",
    "EdgeListError",
    "ErrorBoundInputs",
    "GenSpec",
    "IterationConfig",
    "OpinionState",
    "PolynomialSpec",
    "SampledPath",
    "SparseTransition",
    "SparsifierConfig",
    "SparsifierOutput",
    "WeightedGraph",
    "build_polynomial_laplacian",
    "build_sparse_transition",
    "build_sparsifier",
    "build_transition_polynomial",
    "contraction_check",
    "derive_rng",
    "generate_innate",
    "generate_resistance",
    "iterate_opinions",
    "largest_connected_component",
    "load_edge_list",
    "mean_absolute_error",
    "path_sample",
    "random_walk",
    "sample_neighbor",
    "singular_gap_estimate",
    "solve_equilibrium_exact",
    "spectral_similarity_check",
    "theorem9_bound",
]
