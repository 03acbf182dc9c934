"""Independent reference implementations used only by the tests."""
import math

import numpy as np


def reference_dtw_sq(a, b):
    """Unconstrained O(len_a * len_b) DTW with squared local cost, full table."""
    la, lb = len(a), len(b)
    D = [[math.inf] * (lb + 1) for _ in range(la + 1)]
    D[0][0] = 0.0
    for i in range(1, la + 1):
        for j in range(1, lb + 1):
            d = float(a[i - 1]) - float(b[j - 1])
            D[i][j] = d * d + min(D[i - 1][j - 1], D[i - 1][j], D[i][j - 1])
    return D[la][lb]


def reference_dtw(a, b):
    return math.sqrt(reference_dtw_sq(a, b))


def grid_argmin_quartic(p, q, lo=-10.0, hi=10.0, step=1e-4):
    xs = np.arange(lo, hi + step / 2, step)
    vals = xs**4 + 2 * p * xs**2 + 4 * q * xs
    k = int(np.argmin(vals))
    return float(xs[k]), float(vals[k])


def dense_objective(A_dense, mask, X):
    R = np.where(mask, A_dense - X @ X.T, 0.0)
    return float((R * R).sum())
