"""Symmetric factorization of a partially observed matrix by exact cyclic CD.

Minimizes ``||P_Omega(A - X X^T)||_F^2`` over ``X`` (n x d). Columns are
visited in order; while column ``i`` is being updated the residual holds
``P_Omega(A - sum_{c != i} X_c X_c^T)`` and every coordinate ``X[j, i]`` is set
to the exact minimizer of a quartic whose coefficients only involve row
``j``'s observed entries.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ._backend import kernels
from ._quartic import psi, quartic_argmin as _quartic_argmin
from .sampling import PartialSimilarityMatrix
from .timeseries_io import DataError

log = logging.getLogger(__name__)


def quartic_argmin(p: float, q: float) -> float:
    """Global minimizer of ``x**4 + 2 p x**2 + 4 q x``."""
    p = float(p)
    q = float(q)
    if not (np.isfinite(p) and np.isfinite(q)):
        raise ValueError(f"non-finite quartic coefficients p={p}, q={q}")
    return _quartic_argmin(p, q)


__all__ = [
    "FactorizeConfig",
    "FactorizeTrace",
    "ResidualState",
    "dense_oracle_factorize",
    "factorize",
    "observed_error",
    "psi",
    "quartic_argmin",
    "true_error",
    "update_coordinate",
]


@dataclass(frozen=True)
class FactorizeConfig:
    d: int = 30
    iterations: int = 20
    seed: int | None = None
    init_mode: str = "zero"
    tol: float | None = None  # early stop on relative objective change; off by default
    refresh_every: int = 5

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.init_mode not in ("zero", "perturbed"):
            raise ValueError(f"init_mode must be 'zero' or 'perturbed', got {self.init_mode!r}")
        if self.refresh_every < 1:
            raise ValueError("refresh_every must be >= 1")


@dataclass
class FactorizeTrace:
    observed_error: list[float] = field(default_factory=list)
    objective: list[float] = field(default_factory=list)
    true_error: list[float] | None = None
    ops: list[int] = field(default_factory=list)
    initial_objective: float = float("nan")
    stopped_early: bool = False

    @property
    def iterations(self) -> int:
        return len(self.observed_error)

    def relative_changes(self) -> np.ndarray:
        """Objective decrease of each pass, relative to the objective at initialization.

        Entry ``t - 1`` compares pass ``t`` with pass ``t - 1`` (pass 0 being the
        initial factors). Scaling by the initial objective rather than the
        previous one keeps the measure meaningful when the objective itself
        converges to zero.
        """
        f = np.concatenate([[self.initial_objective], self.objective])
        return np.abs(np.diff(f)) / max(self.initial_objective, np.finfo(float).tiny)


class ResidualState:
    """Residual ``R`` on the observed support, laid out along the row index."""

    def __init__(self, A: PartialSimilarityMatrix):
        self.A = A
        self.indptr = A.indptr
        self.indices = A.indices
        self.diag_pos = A.diag_pos
        self.slot_rows = np.repeat(np.arange(A.n, dtype=np.int64), np.diff(A.indptr))
        self.target = A.slot_values()
        self.resid = self.target.copy()

    def refresh(self, X: np.ndarray) -> None:
        """Recompute ``P_Omega(A - X X^T)`` from scratch."""
        self.resid = self.target - np.einsum(
            "ij,ij->i", X[self.slot_rows], X[self.indices]
        )

    def add_column(self, x: np.ndarray) -> None:
        kernels().residual_update(self.slot_rows, self.indices, self.resid, x, 1.0)

    def subtract_column(self, x: np.ndarray) -> None:
        kernels().residual_update(self.slot_rows, self.indices, self.resid, x, -1.0)

    def objective(self) -> float:
        return float(self.resid @ self.resid)


def update_coordinate(state: ResidualState, X: np.ndarray, i: int, j: int) -> float:
    """Set ``X[j, i]`` to its exact minimizer given the residual of column ``i``.

    ``state`` must hold the residual with column ``i`` added back.
    """
    lo, hi = state.indptr[j], state.indptr[j + 1]
    xs = X[state.indices[lo:hi], i]
    xj = X[j, i]
    rjj = state.resid[state.diag_pos[j]]
    p = float(xs @ xs) - xj * xj - rjj
    q = -float(xs @ state.resid[lo:hi]) + xj * rjj
    X[j, i] = quartic_argmin(p, q)
    return float(X[j, i])


def _initial_factors(n: int, cfg: FactorizeConfig) -> np.ndarray:
    if cfg.init_mode == "zero":
        return np.zeros((n, cfg.d))
    rng = np.random.default_rng(cfg.seed)
    return rng.uniform(-1e-3, 1e-3, size=(n, cfg.d))


def factorize(
    A: PartialSimilarityMatrix,
    cfg: FactorizeConfig = FactorizeConfig(),
    A_full: np.ndarray | None = None,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, FactorizeTrace]:
    """Run ``cfg.iterations`` outer passes of exact cyclic coordinate descent.

    Returns the n x d factor and a per-iteration trace. ``A_full`` (dense,
    test scale) additionally records the error against the full matrix;
    ``callback(t, X)`` is invoked after each outer pass.
    """
    n = A.n
    if n < 2:
        raise ValueError("need at least two rows")
    missing = A.missing_diagonal()
    if missing is not None:
        raise DataError(f"diagonal entry ({missing}, {missing}) is not observed")

    X = _initial_factors(n, cfg)
    state = ResidualState(A)
    if cfg.init_mode != "zero":
        state.refresh(X)
    k = kernels()
    norm_sq = float(state.target @ state.target)
    denom = np.sqrt(norm_sq) if norm_sq > 0 else np.nan
    trace = FactorizeTrace(
        true_error=[] if A_full is not None else None, initial_objective=state.objective()
    )
    Xt = np.empty(n)  # contiguous column buffer for the kernels

    for t in range(1, cfg.iterations + 1):
        ops = 0
        for i in range(cfg.d):
            Xt[:] = X[:, i]
            state.add_column(Xt)
            ops += k.cd_sweep(state.indptr, state.indices, state.resid, state.diag_pos, Xt)
            state.subtract_column(Xt)
            X[:, i] = Xt
        if t % cfg.refresh_every == 0:
            state.refresh(X)
        if not np.all(np.isfinite(X)):
            raise FloatingPointError(f"non-finite factor entries after iteration {t}")

        obj = state.objective()
        trace.objective.append(obj)
        trace.observed_error.append(float(np.sqrt(obj) / denom))
        trace.ops.append(int(ops))
        if A_full is not None:
            trace.true_error.append(true_error(A_full, X))
        log.debug("iteration %d: observed error %.3e", t, trace.observed_error[-1])
        if callback is not None:
            callback(t, X)
        if cfg.tol is not None and trace.relative_changes()[-1] < cfg.tol:
            trace.stopped_early = True
            break
    return X, trace


def observed_error(A: PartialSimilarityMatrix, X: np.ndarray) -> float:
    """``||P_Omega(A - X X^T)||_F / ||P_Omega(A)||_F``."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != A.n:
        raise ValueError(f"factor shape {X.shape} incompatible with n={A.n}")
    w = A.weights()
    denom = float(w @ (A.values * A.values))
    if denom == 0.0:
        raise ValueError("observed matrix is all zero")
    r = A.values - np.einsum("ij,ij->i", X[A.rows], X[A.cols])
    return float(np.sqrt((w @ (r * r)) / denom))


def true_error(A_full: np.ndarray, X: np.ndarray) -> float:
    """``||A - X X^T||_F / ||A||_F`` over all entries."""
    A_full = np.asarray(A_full, dtype=np.float64)
    denom = np.linalg.norm(A_full)
    if denom == 0.0:
        raise ValueError("full matrix has zero norm")
    return float(np.linalg.norm(A_full - X @ X.T) / denom)


def dense_oracle_factorize(A_full: np.ndarray, d: int) -> np.ndarray:
    """Best rank-d PSD factor ``Q_d sqrt(Lambda_d)`` from the top eigenpairs."""
    A_full = np.asarray(A_full, dtype=np.float64)
    if A_full.ndim != 2 or A_full.shape[0] != A_full.shape[1]:
        raise ValueError("matrix must be square")
    if not 1 <= d <= A_full.shape[0]:
        raise ValueError("need 1 <= d <= n")
    vals, vecs = np.linalg.eigh(0.5 * (A_full + A_full.T))
    top = np.argsort(vals)[::-1][:d]
    lam = np.clip(vals[top], 0.0, None)
    return vecs[:, top] * np.sqrt(lam)


def write_features(X: np.ndarray, path, header: bool = True) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        if header:
            fh.write(",".join(f"f{c}" for c in range(X.shape[1])) + "\n")
        for row in X.tolist():
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_features(path) -> np.ndarray:
    path = Path(path)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines() if ln.strip()]
    if lines and lines[0].split(",")[0].strip().startswith("f"):
        lines = lines[1:]
    try:
        rows = [[float(v) for v in ln.split(",")] for ln in lines]
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise DataError(f"{path}: empty or ragged feature matrix")
    return np.array(rows)


def write_trace(trace: FactorizeTrace, path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        if trace.true_error is not None:
            fh.write("iteration,observed_error,true_error\n")
            for t, (o, e) in enumerate(zip(trace.observed_error, trace.true_error), start=1):
                fh.write(f"{t},{o:.17g},{e:.17g}\n")
        else:
            fh.write("iteration,observed_error\n")
            for t, o in enumerate(trace.observed_error, start=1):
                fh.write(f"{t},{o:.17g}\n")
