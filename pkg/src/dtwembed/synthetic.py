"""Synthetic inputs for tests, the acceptance suite and the benchmark."""
from __future__ import annotations

import numpy as np

from .sampling import PartialSimilarityMatrix, default_budget, sample_pairs
from .timeseries_io import Dataset


def sinusoid_dataset(
    n_per_class: int = 100,
    periods=(40.0, 20.0, 10.0),
    length_range=(80, 120),
    max_phase: float = np.pi / 2,
    noise: float = 0.1,
    seed=0,
) -> Dataset:
    """One class per period; phase, length and additive noise jittered per series."""
    rng = np.random.default_rng(seed)
    series, labels = [], []
    for label, period in enumerate(periods):
        for _ in range(n_per_class):
            length = int(rng.integers(length_range[0], length_range[1] + 1))
            phase = rng.uniform(0.0, max_phase)
            t = np.arange(length)
            series.append(np.sin(2 * np.pi * t / period + phase) + noise * rng.standard_normal(length))
            labels.append(label)
    return Dataset(series, labels)


def low_rank_gram(n: int, rank: int, seed=0) -> tuple[np.ndarray, np.ndarray]:
    """Factor with iid U[-1, 1] entries and its Gram matrix."""
    rng = np.random.default_rng(seed)
    G = rng.uniform(-1.0, 1.0, size=(n, rank))
    return G, G @ G.T


def sampled_gram(A: np.ndarray, budget: int | None = None, seed=0) -> PartialSimilarityMatrix:
    """Observe the diagonal of ``A`` plus ``budget`` uniformly sampled pairs."""
    n = A.shape[0]
    if budget is None:
        budget = default_budget(n)
    pairs = sample_pairs(n, budget, seed).pairs
    diag = np.arange(n)
    rows = np.concatenate([diag, pairs[:, 0]])
    cols = np.concatenate([diag, pairs[:, 1]])
    return PartialSimilarityMatrix(n, rows, cols, A[rows, cols])
