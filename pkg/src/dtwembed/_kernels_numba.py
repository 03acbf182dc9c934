"""numba kernels. Signatures mirror ``_kernels_numpy`` one to one."""
import os

import numba
import numpy as np
from numba import njit, prange

if "NUMBA_THREADING_LAYER" not in os.environ:
    # skip the TBB probe, which warns on older TBB builds
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

from ._quartic import quartic_argmin


@njit(cache=True, nogil=True)
def dtw_sq(a, b, window):
    """Accumulated squared cost of the best banded warping path."""
    la = a.shape[0]
    lb = b.shape[0]
    w = max(window, abs(la - lb))
    prev = np.full(lb + 1, np.inf)
    cur = np.full(lb + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, la + 1):
        jlo = max(1, i - w)
        jhi = min(lb, i + w)
        cur[jlo - 1] = np.inf
        ai = a[i - 1]
        for j in range(jlo, jhi + 1):
            d = ai - b[j - 1]
            m = prev[j - 1]
            if prev[j] < m:
                m = prev[j]
            if cur[j - 1] < m:
                m = cur[j - 1]
            cur[j] = d * d + m
        if jhi < lb:
            cur[jhi + 1] = np.inf
        prev, cur = cur, prev
    return prev[lb]


@njit(cache=True, parallel=True)
def dtw_sq_pairs(flat, offsets, left, right, window):
    out = np.empty(left.shape[0])
    for t in prange(left.shape[0]):
        i = left[t]
        j = right[t]
        out[t] = dtw_sq(flat[offsets[i]:offsets[i + 1]], flat[offsets[j]:offsets[j + 1]], window)
    return out


@njit(cache=True)
def residual_update(rows, cols, resid, x, sign):
    for t in range(resid.shape[0]):
        resid[t] += sign * (x[rows[t]] * x[cols[t]])


@njit(cache=True)
def cd_sweep(indptr, indices, resid, diag_pos, x):
    """One inner pass over all rows of a column; returns entries touched."""
    n = x.shape[0]
    ops = 0
    for j in range(n):
        s2 = 0.0
        sr = 0.0
        for ptr in range(indptr[j], indptr[j + 1]):
            xk = x[indices[ptr]]
            s2 += xk * xk
            sr += xk * resid[ptr]
        xj = x[j]
        rjj = resid[diag_pos[j]]
        p = s2 - xj * xj - rjj
        q = -sr + xj * rjj
        x[j] = quartic_argmin(p, q)
        ops += indptr[j + 1] - indptr[j]
    return ops
