"""Small scalar search routines shared by the analytic modules."""

import math

INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_max(f, lo, hi, xtol=1e-10, max_iter=500):
    """Maximize a unimodal ``f`` on ``[lo, hi]`` by golden-section search.

    Returns ``(x, f(x))`` for the best point seen. The interval stops shrinking
    once its width is below ``xtol`` or floating point resolution is hit.
    """
    a, b = float(lo), float(hi)
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INVPHI * (b - a)
            fd = f(d)
        if not (a < c < d < b):
            break
    best = max(((c, fc), (d, fd), (a, f(a)), (b, f(b))), key=lambda p: p[1])
    return best


def bisect_sign(positive, lo, hi, xtol=1e-13, max_iter=400):
    """Shrink ``[lo, hi]`` around the point where ``positive`` flips to True.

    ``positive(lo)`` is assumed False and ``positive(hi)`` True; the returned
    bracket keeps that property. Iteration continues until the width is at most
    ``xtol`` or the midpoint no longer separates the ends.
    """
    for _ in range(max_iter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if not (lo < mid < hi):
            break
        if positive(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi
