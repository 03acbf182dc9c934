"""Pure-numpy kernels, used when numba is disabled or unavailable."""
import numpy as np

from ._quartic import quartic_argmin


def dtw_sq(a, b, window):
    # anti-diagonal sweep: cells with i + j = s only depend on s - 1 and s - 2
    la = a.shape[0]
    lb = b.shape[0]
    w = max(int(window), abs(la - lb))
    D = np.full((la + 1, lb + 1), np.inf)
    D[0, 0] = 0.0
    for s in range(2, la + lb + 1):
        ilo = max(1, s - lb, -((w - s) // 2))
        ihi = min(la, s - 1, (s + w) // 2)
        if ilo > ihi:
            continue
        i = np.arange(ilo, ihi + 1)
        j = s - i
        d = a[i - 1] - b[j - 1]
        m = np.minimum(np.minimum(D[i - 1, j - 1], D[i - 1, j]), D[i, j - 1])
        D[i, j] = d * d + m
    return float(D[la, lb])


def dtw_sq_pairs(flat, offsets, left, right, window):
    out = np.empty(left.shape[0])
    for t in range(left.shape[0]):
        i = left[t]
        j = right[t]
        out[t] = dtw_sq(flat[offsets[i]:offsets[i + 1]], flat[offsets[j]:offsets[j + 1]], window)
    return out


def residual_update(rows, cols, resid, x, sign):
    resid += sign * (x[rows] * x[cols])


def cd_sweep(indptr, indices, resid, diag_pos, x):
    n = x.shape[0]
    for j in range(n):
        lo, hi = indptr[j], indptr[j + 1]
        xs = x[indices[lo:hi]]
        xj = x[j]
        rjj = resid[diag_pos[j]]
        p = float(xs @ xs) - xj * xj - rjj
        q = -float(xs @ resid[lo:hi]) + xj * rjj
        x[j] = quartic_argmin(p, q)
    return int(indptr[n] - indptr[0])
