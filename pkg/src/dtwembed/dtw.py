"""Windowed DTW distance and the inner-product style DTW similarity.

The local cost is the squared difference and the distance is the square root
of the accumulated cost, so ``dtw_norm(t)`` (distance to the length-one zero
series) is exactly the Euclidean norm of ``t``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .timeseries_io import Dataset, as_series


@dataclass(frozen=True)
class DtwConfig:
    """Sakoe-Chiba half-width. It is widened per pair to the length difference."""

    window: int = 0

    def __post_init__(self):
        if int(self.window) != self.window or self.window < 0:
            raise ValueError(f"window must be a nonnegative integer, got {self.window!r}")
        object.__setattr__(self, "window", int(self.window))


def default_window(ds: Dataset, cap: int = 40) -> int:
    """``min(cap, round(mean length / 10))`` over the whole dataset."""
    mean_len = float(np.mean(ds.lengths))
    # round half up rather than Python's banker's rounding
    return int(min(cap, np.floor(mean_len / 10.0 + 0.5)))


def dtw_distance(a, b, cfg: DtwConfig = DtwConfig()) -> float:
    a = as_series(a)
    b = as_series(b)
    return float(np.sqrt(kernels().dtw_sq(a, b, cfg.window)))


def dtw_norm(t) -> float:
    """DTW distance to the single-sample zero series, i.e. the L2 norm."""
    return dtw_distance(t, np.zeros(1))


def dtw_similarity(a, b, b_a: float, b_b: float, cfg: DtwConfig = DtwConfig()) -> float:
    """``(b_a**2 + b_b**2 - DTW(a, b)**2) / 2`` with precomputed norms."""
    dist_sq = kernels().dtw_sq(as_series(a), as_series(b), cfg.window)
    return 0.5 * (b_a * b_a + b_b * b_b - dist_sq)


def pairwise_dtw_sq(ds: Dataset, left: np.ndarray, right: np.ndarray, cfg: DtwConfig) -> np.ndarray:
    """Squared DTW for each pair (left[t], right[t]); output order follows input order."""
    flat, offsets = ds.packed()
    left = np.ascontiguousarray(left, dtype=np.int64)
    right = np.ascontiguousarray(right, dtype=np.int64)
    if left.size and (min(left.min(), right.min()) < 0 or max(left.max(), right.max()) >= len(ds)):
        raise IndexError("pair index out of range")
    return kernels().dtw_sq_pairs(flat, offsets, left, right, cfg.window)
