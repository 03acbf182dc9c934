"""Scalar minimizer of x**4 + 2*p*x**2 + 4*q*x.

Written against ``math`` only so the same source compiles under numba.
"""
import math

try:
    from numba.extending import register_jitable
except ImportError:  # pragma: no cover
    def register_jitable(fn):
        return fn

_TWO_PI_3 = 2.0 * math.pi / 3.0


@register_jitable
def psi(x, p, q):
    x2 = x * x
    return x2 * (x2 + 2.0 * p) + 4.0 * q * x


@register_jitable
def _polish(x, p, q):
    # Newton on x^3 + p x + q; keep a step only if it shrinks the residual
    for _ in range(3):
        f = x * x * x + p * x + q
        df = 3.0 * x * x + p
        if f == 0.0 or df == 0.0:
            break
        y = x - f / df
        fy = y * y * y + p * y + q
        if abs(fy) < abs(f):
            x = y
        else:
            break
    return x


@register_jitable
def _better(x, fx, best, fbest):
    tol = 1e-12 * (1.0 + abs(fx) + abs(fbest))
    if fx < fbest - tol:
        return True
    if fx > fbest + tol:
        return False
    if (x >= 0.0) != (best >= 0.0):
        return x >= 0.0
    return abs(x) > abs(best)


@register_jitable
def quartic_argmin(p, q):
    """Global minimizer of ``x**4 + 2 p x**2 + 4 q x``.

    Candidates are the real roots of the stationarity cubic ``x**3 + p x + q``
    (trigonometric form for three real roots, cancellation-free Cardano
    otherwise). Ties go to the nonnegative root, then the larger magnitude.
    """
    if q == 0.0:
        # symmetric double well (p < 0) or single well
        return math.sqrt(-p) if p < 0.0 else 0.0
    disc = -4.0 * p * p * p - 27.0 * q * q
    if disc > 0.0:
        # three distinct real roots, necessarily p < 0
        m = 2.0 * math.sqrt(-p / 3.0)
        c = 3.0 * q / (p * m)
        if c > 1.0:
            c = 1.0
        elif c < -1.0:
            c = -1.0
        theta = math.acos(c) / 3.0
        best = _polish(m * math.cos(theta), p, q)
        fbest = psi(best, p, q)
        for k in range(1, 3):
            x = _polish(m * math.cos(theta - _TWO_PI_3 * k), p, q)
            fx = psi(x, p, q)
            if _better(x, fx, best, fbest):
                best = x
                fbest = fx
        return best
    half_q = 0.5 * q
    third_p = p / 3.0
    d = half_q * half_q + third_p * third_p * third_p
    if d < 0.0:
        d = 0.0
    u3 = -half_q - math.copysign(math.sqrt(d), q)
    if u3 == 0.0:
        return 0.0
    u = math.copysign(abs(u3) ** (1.0 / 3.0), u3)
    x = u - third_p / u
    return _polish(x, p, q)
