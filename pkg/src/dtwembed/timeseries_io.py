"""Loading and saving UCR-style datasets with ragged rows."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

_SPLIT = re.compile(r"[,\t ]+")


class DataError(ValueError):
    """Malformed input data (bad token, empty series, non-finite value...)."""


def as_series(values) -> np.ndarray:
    """Validate one series and return it as a contiguous float64 array."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise DataError(f"series must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise DataError("series is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError("series contains non-finite values")
    return arr


@dataclass
class Dataset:
    """Ordered collection of series, optionally labelled."""

    series: list[np.ndarray]
    labels: np.ndarray | None = None
    _lengths: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.series = [as_series(s) for s in self.series]
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (len(self.series),):
                raise DataError(
                    f"{len(self.labels)} labels for {len(self.series)} series"
                )
        self._lengths = np.array([s.size for s in self.series], dtype=np.int64)

    def __len__(self) -> int:
        return len(self.series)

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    def packed(self) -> tuple[np.ndarray, np.ndarray]:
        """All series concatenated, plus offsets such that series i is flat[off[i]:off[i+1]]."""
        offsets = np.zeros(len(self.series) + 1, dtype=np.int64)
        np.cumsum(self._lengths, out=offsets[1:])
        flat = np.concatenate(self.series) if self.series else np.empty(0)
        return flat, offsets

    def znormalized(self) -> Dataset:
        return Dataset([znormalize(s) for s in self.series], self.labels)

    @classmethod
    def concat(cls, parts: Sequence[Dataset]) -> Dataset:
        series = [s for ds in parts for s in ds.series]
        if all(ds.labels is not None for ds in parts):
            labels = np.concatenate([ds.labels for ds in parts])
        else:
            labels = None
        return cls(series, labels)


def znormalize(ts) -> np.ndarray:
    """Zero mean, unit population std; near-constant series map to zeros."""
    ts = as_series(ts)
    std = ts.std()
    if std < 1e-12:
        return np.zeros_like(ts)
    return (ts - ts.mean()) / std


def _parse_line(line: str, lineno: int, has_labels: bool, path) -> tuple[int | None, np.ndarray]:
    tokens = [t for t in _SPLIT.split(line.strip()) if t]
    label = None
    if has_labels:
        tok = tokens[0]
        try:
            label = int(tok)
        except ValueError:
            # UCR files sometimes write integer classes as "1.0000000e+00"
            try:
                f = float(tok)
            except ValueError:
                f = float("nan")
            if not f.is_integer():
                raise DataError(f"{path}:{lineno}:1: label {tok!r} is not an integer") from None
            label = int(f)
        tokens = tokens[1:]
    if not tokens:
        raise DataError(f"{path}:{lineno}: empty series")
    values = np.empty(len(tokens))
    offset = 2 if has_labels else 1
    for col, tok in enumerate(tokens):
        try:
            v = float(tok)
        except ValueError:
            raise DataError(
                f"{path}:{lineno}:{col + offset}: cannot parse {tok!r} as a number"
            ) from None
        if not np.isfinite(v):
            raise DataError(f"{path}:{lineno}:{col + offset}: non-finite value {tok!r}")
        values[col] = v
    return label, values


def load_dataset(path, has_labels: bool = True) -> Dataset:
    """Read one series per nonblank line; comma, tab or space delimited."""
    path = Path(path)
    series, labels = [], []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            label, values = _parse_line(line, lineno, has_labels, path)
            series.append(values)
            labels.append(label)
    return Dataset(series, np.array(labels, dtype=np.int64) if has_labels else None)


def save_dataset(ds: Dataset, path, delimiter: str = ",") -> None:
    """Inverse of ``load_dataset``; reals are written round-trip exact."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for idx, s in enumerate(ds.series):
            fields = [repr(float(v)) for v in s]
            if ds.labels is not None:
                fields.insert(0, str(int(ds.labels[idx])))
            fh.write(delimiter.join(fields) + "\n")
