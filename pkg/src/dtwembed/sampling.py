"""Uniform pair sampling and the partially observed similarity matrix."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import get_backend, kernels
from .dtw import DtwConfig, pairwise_dtw_sq
from .timeseries_io import DataError, Dataset


@dataclass(frozen=True)
class PairSample:
    """Distinct off-diagonal pairs ``(i, j)`` with ``i < j``, sorted row-major."""

    n: int
    pairs: np.ndarray  # (m, 2) int64

    def __len__(self) -> int:
        return self.pairs.shape[0]

    def as_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.pairs}


def total_pairs(n: int) -> int:
    return n * (n - 1) // 2


def default_budget(n: int, c: float = 20.0) -> int:
    """``round(c * n * ln n)`` clamped to the number of distinct pairs."""
    if n < 2:
        raise ValueError("need n >= 2")
    if c <= 0:
        raise ValueError("sample constant must be positive")
    return int(min(max(round(c * n * math.log(n)), 0), total_pairs(n)))


def _unrank_pairs(k: np.ndarray, n: int) -> np.ndarray:
    # row i of the strict upper triangle starts at i * (2n - i - 1) / 2
    def start(i):
        return i * (2 * n - i - 1) // 2

    b = 2 * n - 1
    i = np.floor((b - np.sqrt(np.maximum(b * b - 8.0 * k, 0.0))) / 2.0).astype(np.int64)
    i = np.clip(i, 0, n - 2)
    i = np.where(start(i) > k, i - 1, i)
    i = np.where(start(i + 1) <= k, i + 1, i)
    j = k - start(i) + i + 1
    return np.stack([i, j], axis=1)


def sample_pairs(n: int, budget: int, seed=None) -> PairSample:
    """Draw ``min(budget, n(n-1)/2)`` distinct pairs uniformly without replacement."""
    if n < 2:
        raise ValueError("need n >= 2")
    if budget < 0:
        raise ValueError(f"budget must be nonnegative, got {budget}")
    rng = np.random.default_rng(seed)
    total = total_pairs(n)
    m = min(int(budget), total)
    if 2 * m > total:
        ranks = rng.permutation(total)[:m]
    else:
        # rejection: the first m distinct draws of an iid stream are a uniform m-subset
        ranks = np.empty(0, dtype=np.int64)
        while ranks.size < m:
            need = m - ranks.size
            draw = rng.integers(0, total, size=need + need // 8 + 16, dtype=np.int64)
            pool = np.concatenate([ranks, draw])
            _, first = np.unique(pool, return_index=True)
            ranks = pool[np.sort(first)][:m]
    ranks = np.sort(ranks)
    return PairSample(n, _unrank_pairs(ranks, n))


class PartialSimilarityMatrix:
    """Symmetric n x n matrix observed on a sparse index set.

    Each observed entry is stored once as ``(i, j, value)`` with ``i <= j``.
    A row index over both triangles (CSR ``indptr``/``indices``, plus
    ``entry_of`` mapping each slot back to its stored entry) gives every row's
    observed columns in sorted order.
    """

    def __init__(self, n: int, rows, cols, values):
        rows = np.asarray(rows, dtype=np.int64).ravel()
        cols = np.asarray(cols, dtype=np.int64).ravel()
        values = np.asarray(values, dtype=np.float64).ravel()
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("rows, cols and values must have equal length")
        if rows.size and (min(rows.min(), cols.min()) < 0 or max(rows.max(), cols.max()) >= n):
            raise IndexError(f"entry index out of range for n={n}")
        lo = np.minimum(rows, cols)
        hi = np.maximum(rows, cols)
        order = np.lexsort((hi, lo))
        lo, hi, values = lo[order], hi[order], values[order]
        if lo.size > 1:
            dup = (lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])
            if dup.any():
                k = int(np.argmax(dup))
                raise ValueError(f"duplicate entry ({lo[k]}, {hi[k]})")
        self.n = int(n)
        self.rows = lo
        self.cols = hi
        self.values = values
        self._build_index()

    def _build_index(self):
        off = self.rows != self.cols
        ids = np.arange(self.rows.size, dtype=np.int64)
        r = np.concatenate([self.rows, self.cols[off]])
        c = np.concatenate([self.cols, self.rows[off]])
        src = np.concatenate([ids, ids[off]])
        order = np.lexsort((c, r))
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(r, minlength=self.n), out=self.indptr[1:])
        self.indices = c[order]
        self.entry_of = src[order]
        slot_rows = r[order]
        self.diag_pos = np.full(self.n, -1, dtype=np.int64)
        diag = np.flatnonzero(self.indices == slot_rows)
        self.diag_pos[slot_rows[diag]] = diag

    def __len__(self) -> int:
        return self.values.size

    @property
    def offdiag_mask(self) -> np.ndarray:
        return self.rows != self.cols

    def missing_diagonal(self) -> int | None:
        """First row whose diagonal entry is unobserved, or None."""
        missing = np.flatnonzero(self.diag_pos < 0)
        return int(missing[0]) if missing.size else None

    def row_index(self, j: int) -> np.ndarray:
        return self.indices[self.indptr[j]:self.indptr[j + 1]]

    def get(self, i: int, j: int) -> float:
        """Observed value at (i, j) in either order; KeyError if unobserved."""
        cols = self.row_index(i)
        k = np.searchsorted(cols, j)
        if k >= cols.size or cols[k] != j:
            raise KeyError((i, j))
        return float(self.values[self.entry_of[self.indptr[i] + k]])

    def __contains__(self, ij) -> bool:
        i, j = ij
        cols = self.row_index(i)
        k = np.searchsorted(cols, j)
        return bool(k < cols.size and cols[k] == j)

    def entries(self) -> dict[tuple[int, int], float]:
        return {(int(i), int(j)): float(v) for i, j, v in zip(self.rows, self.cols, self.values)}

    def slot_values(self) -> np.ndarray:
        """Values laid out along the row index (both triangles)."""
        return self.values[self.entry_of]

    def weights(self) -> np.ndarray:
        """Multiplicity of each stored entry in the full matrix (1 diagonal, 2 off)."""
        return np.where(self.offdiag_mask, 2.0, 1.0)

    def to_dense(self, fill: float = np.nan) -> np.ndarray:
        out = np.full((self.n, self.n), fill)
        out[self.rows, self.cols] = self.values
        out[self.cols, self.rows] = self.values
        return out

    def mask(self) -> np.ndarray:
        m = np.zeros((self.n, self.n), dtype=bool)
        m[self.rows, self.cols] = True
        m[self.cols, self.rows] = True
        return m

    @classmethod
    def from_dense(cls, A: np.ndarray, mask: np.ndarray) -> PartialSimilarityMatrix:
        """Observe ``A`` where ``mask`` is set (upper triangle is authoritative)."""
        iu, ju = np.nonzero(np.triu(mask | mask.T))
        return cls(A.shape[0], iu, ju, A[iu, ju])


def build_partial_similarity(
    ds: Dataset, sample: PairSample, cfg: DtwConfig, threads: int | None = None
) -> PartialSimilarityMatrix:
    """Diagonal from the norms plus one DTW similarity per sampled pair."""
    n = len(ds)
    if sample.n != n:
        raise IndexError(f"sample is for n={sample.n}, dataset has {n} series")
    if threads is not None and get_backend() == "numba":
        import numba

        numba.set_num_threads(max(1, min(int(threads), numba.config.NUMBA_NUM_THREADS)))
    k = kernels()
    zero = np.zeros(1)
    norm_sq = np.array([k.dtw_sq(s, zero, 0) for s in ds.series])
    left = sample.pairs[:, 0]
    right = sample.pairs[:, 1]
    dist_sq = pairwise_dtw_sq(ds, left, right, cfg)
    off_vals = 0.5 * (norm_sq[left] + norm_sq[right] - dist_sq)
    diag = np.arange(n, dtype=np.int64)
    return PartialSimilarityMatrix(
        n,
        np.concatenate([diag, left]),
        np.concatenate([diag, right]),
        np.concatenate([norm_sq, off_vals]),
    )


def write_sparse(A: PartialSimilarityMatrix, path) -> None:
    """Triplet text format: ``n num_entries`` then ``i j value`` per entry (i <= j)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        fh.write(f"{A.n} {len(A)}\n")
        for i, j, v in zip(A.rows.tolist(), A.cols.tolist(), A.values.tolist()):
            fh.write(f"{i} {j} {v:.17g}\n")


def read_sparse(path) -> PartialSimilarityMatrix:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}:1: expected header 'n num_entries'")
        try:
            n, m = int(header[0]), int(header[1])
        except ValueError:
            raise DataError(f"{path}:1: malformed header") from None
        rows = np.empty(m, dtype=np.int64)
        cols = np.empty(m, dtype=np.int64)
        vals = np.empty(m)
        count = 0
        for lineno, line in enumerate(fh, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 or count >= m:
                raise DataError(f"{path}:{lineno}: malformed or extra entry line")
            try:
                rows[count], cols[count], vals[count] = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                raise DataError(f"{path}:{lineno}: cannot parse entry {line.strip()!r}") from None
            if rows[count] > cols[count]:
                raise DataError(f"{path}:{lineno}: entries must satisfy i <= j")
            count += 1
    if count != m:
        raise DataError(f"{path}: header declares {m} entries, found {count}")
    try:
        return PartialSimilarityMatrix(n, rows, cols, vals)
    except (IndexError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None
