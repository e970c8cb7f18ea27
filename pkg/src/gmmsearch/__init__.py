"""Automatic Gaussian mixture model selection.

Fits mixtures over a grid of initialization methods (agglomerative with
L1/L2/cosine affinities, or k-means), covariance constraints (spherical,
diag, tied, full) and component counts, selects the best model by BIC or
AIC, and avoids singleton clusters through a fixed ladder of diagonal
regularization factors. A recursive mode builds a cluster dendrogram.
"""

from .backend import BACKEND
from .datasets import SyntheticSpec, generate
from .errors import (
    DegenerateDataError,
    EmFailure,
    InitFailure,
    InputError,
    NumericError,
    ParseError,
    SearchFailure,
)
from .gmm import (
    CONSTRAINTS,
    CRITERIA,
    EmSettings,
    FitResult,
    GmmModel,
    criterion_value,
    em_fit,
    log_likelihood,
    param_count,
    predict_labels,
)
from .hierarchy import DendrogramNode, cut_at_depth, fit_dendrogram, leaf_count, tree_depth
from .init_methods import (
    AFFINITIES,
    LINKAGES,
    InitMethod,
    InitParams,
    agglomerate,
    enumerate_init_methods,
    estimate_gaussian_parameters,
    kmeans_init,
    subset_data,
)
from .io import read_labels, read_matrix, write_outputs
from .metrics import (
    BenchmarkReport,
    adjusted_rand_index,
    subsample_benchmark,
    wilcoxon_signed_rank,
)
from .search import (
    REG_LADDER,
    CandidateResult,
    SearchConfig,
    SearchResult,
    gaussian_cluster,
    increase_reg,
    run_search,
)

__version__ = "0.1.0"

__all__ = [
    "AFFINITIES",
    "BACKEND",
    "CONSTRAINTS",
    "CRITERIA",
    "LINKAGES",
    "REG_LADDER",
    "BenchmarkReport",
    "CandidateResult",
    "DegenerateDataError",
    "DendrogramNode",
    "EmFailure",
    "EmSettings",
    "FitResult",
    "GmmModel",
    "InitFailure",
    "InitMethod",
    "InitParams",
    "InputError",
    "NumericError",
    "ParseError",
    "SearchConfig",
    "SearchFailure",
    "SearchResult",
    "SyntheticSpec",
    "adjusted_rand_index",
    "agglomerate",
    "criterion_value",
    "cut_at_depth",
    "em_fit",
    "enumerate_init_methods",
    "estimate_gaussian_parameters",
    "fit_dendrogram",
    "gaussian_cluster",
    "generate",
    "increase_reg",
    "kmeans_init",
    "leaf_count",
    "log_likelihood",
    "param_count",
    "predict_labels",
    "read_labels",
    "read_matrix",
    "run_search",
    "subsample_benchmark",
    "subset_data",
    "tree_depth",
    "wilcoxon_signed_rank",
    "write_outputs",
]
