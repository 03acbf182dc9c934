"""Similarity-preserving vector embeddings of time series.

Pairwise DTW similarities are sampled for O(n log n) pairs and the partially
observed similarity matrix is factorized as ``X X^T`` with exact cyclic
coordinate descent.
"""
from ._backend import get_backend, set_backend
from .dtw import DtwConfig, default_window, dtw_distance, dtw_norm, dtw_similarity
from .evaluation import auc_binary, kmeans, knn1_classify, nmi
from .factorization import (
    FactorizeConfig,
    dense_oracle_factorize,
    factorize,
    observed_error,
    quartic_argmin,
    true_error,
)
from .sampling import (
    PairSample,
    PartialSimilarityMatrix,
    build_partial_similarity,
    default_budget,
    sample_pairs,
)
from .timeseries_io import Dataset, load_dataset, znormalize

__version__ = "0.1.0"
