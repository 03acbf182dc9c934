"""Downstream scoring of learned features: k-means + NMI, 1-NN, AUC."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata


@dataclass
class ClusterResult:
    assignments: np.ndarray
    k: int
    inertia: float
    history: list[float]  # inertia after each Lloyd step of the winning restart


def _kmeans_pp(X, k, rng):
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = ((X - centers[0]) ** 2).sum(1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            idx = rng.integers(n)
        else:
            idx = min(int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right")), n - 1)
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(1))
    return centers


def _sq_dists(X, C):
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(-1)


def _lloyd(X, centers, max_iter):
    history = []
    labels = None
    k = centers.shape[0]
    for _ in range(max_iter):
        d2 = _sq_dists(X, centers)
        new = d2.argmin(1)
        history.append(float(d2[np.arange(X.shape[0]), new].sum()))
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for c in range(k):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(0)
            else:
                # empty cluster: move it onto the worst-served point
                worst = int(d2[np.arange(X.shape[0]), labels].argmax())
                centers[c] = X[worst]
                labels[worst] = c
    d2 = _sq_dists(X, centers)
    labels = d2.argmin(1)
    inertia = float(d2[np.arange(X.shape[0]), labels].sum())
    return labels, inertia, history


def kmeans(X, k: int, restarts: int = 10, seed=None, max_iter: int = 300) -> ClusterResult:
    """Lloyd's algorithm with k-means++ seeding; best inertia over restarts."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("feature matrix must be a nonempty 2-d array")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    best = None
    for child in seed.spawn(max(1, restarts)):
        rng = np.random.default_rng(child)
        labels, inertia, history = _lloyd(X, _kmeans_pp(X, k, rng), max_iter)
        if best is None or inertia < best.inertia:
            best = ClusterResult(labels, k, inertia, history)
    return best


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-(p * np.log(p)).sum())


def nmi(a, b) -> float:
    """Normalized mutual information, ``I(a; b) / sqrt(H(a) H(b))``."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("labelings must be 1-d and of equal length")
    if a.size == 0:
        raise ValueError("labelings are empty")
    n = a.size
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1))
    np.add.at(table, (ai, bi), 1.0)
    ra = table.sum(1)
    rb = table.sum(0)
    ha = _entropy(ra, n)
    hb = _entropy(rb, n)
    if ha == 0.0 and hb == 0.0:
        return 1.0
    if ha == 0.0 or hb == 0.0:
        return 0.0
    nz = table > 0
    outer = np.outer(ra, rb)
    mi = float((table[nz] / n * np.log(n * table[nz] / outer[nz])).sum())
    return float(min(1.0, max(0.0, mi / np.sqrt(ha * hb))))


def _nearest(train_X, test_X, chunk=64):
    out = np.empty(test_X.shape[0], dtype=np.int64)
    for s in range(0, test_X.shape[0], chunk):
        d2 = _sq_dists(test_X[s:s + chunk], train_X)
        out[s:s + chunk] = d2.argmin(1)  # first minimum = lowest training index
    return out


def _check_pair(train_X, test_X):
    train_X = np.asarray(train_X, dtype=np.float64)
    test_X = np.asarray(test_X, dtype=np.float64)
    if train_X.ndim != 2 or train_X.shape[0] == 0:
        raise ValueError("training features must be a nonempty 2-d array")
    if test_X.ndim != 2 or test_X.shape[1] != train_X.shape[1]:
        raise ValueError(f"dimension mismatch: train d={train_X.shape[1]}, test shape {test_X.shape}")
    return train_X, test_X


def knn1_classify(train_X, train_y, test_X) -> np.ndarray:
    train_X, test_X = _check_pair(train_X, test_X)
    train_y = np.asarray(train_y)
    if train_y.shape != (train_X.shape[0],):
        raise ValueError("one training label per training row required")
    return train_y[_nearest(train_X, test_X)]


def knn1_margin_scores(train_X, train_y, test_X, positive) -> np.ndarray:
    """Distance to the nearest non-positive minus distance to the nearest positive."""
    train_X, test_X = _check_pair(train_X, test_X)
    train_y = np.asarray(train_y)
    pos = train_y == positive
    if pos.all() or not pos.any():
        raise ValueError("training labels need both positive and other examples")
    d_pos = np.sqrt(_sq_dists(test_X, train_X[pos]).min(1))
    d_neg = np.sqrt(_sq_dists(test_X, train_X[~pos]).min(1))
    return d_neg - d_pos


def auc_binary(scores, labels) -> float:
    """Mann-Whitney AUC; the larger label value is the positive class, ties count 1/2."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.shape != labels.shape:
        raise ValueError("scores and labels differ in length")
    classes = np.unique(labels)
    if classes.size != 2:
        raise ValueError(f"need exactly two classes, got {classes.size}")
    pos = labels == classes[1]
    n_pos = int(pos.sum())
    n_neg = labels.size - n_pos
    ranks = rankdata(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def accuracy(pred, truth) -> float:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("length mismatch")
    return float((pred == truth).mean())
