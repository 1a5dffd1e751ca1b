"""Independent reference computations used across the test suite.

Nothing here imports the package's numerics: brute-force loops, scipy
optimizers and hand-derived closed forms only.
"""

import math

import numpy as np
from scipy.optimize import brentq, minimize_scalar


def cpe_logmgf(lam, mu):
    def f(theta):
        return mu * lam * theta / (mu - theta) if theta < mu else math.inf

    return f


def cpe_conjugate_closed(lam, mu, x):
    return mu * (math.sqrt(x) - math.sqrt(lam)) ** 2


def cpe_conjugate_numeric(lam, mu, x):
    """sup over theta < mu of theta*x - Lambda(theta), via scipy."""
    f = cpe_logmgf(lam, mu)
    res = minimize_scalar(lambda th: -(th * x - f(th)), bounds=(-1e3, mu * (1 - 1e-12)),
                          method="bounded", options={"xatol": 1e-13})
    return -res.fun


def brute_exponent(lam, mu, r, T, D, t_max=None):
    """Minimize the batch-index objective by exhaustive enumeration."""
    k = D % T
    c = (D + 1 - 2 * T) * r
    if t_max is None:
        t_max = int(20 * (D + 1) * max(1.0, 1.0 / (r - lam)))
    t = np.arange(t_max + 1)
    m = t * T + T - 1 - k
    t, m = t[m > 0], m[m > 0].astype(float)
    vals = m * mu * (np.sqrt(r + c / m) - np.sqrt(lam)) ** 2
    i = int(np.argmin(vals))
    return float(vals[i]), int(t[i])


def siso_rstar(lam, mu, D, T):
    """Relaxed balanced rate for SISO fast fading, solved by hand."""
    return lam + (1 - lam) / (1 + mu * (D + 1 - 2 * T) / T)


def brentq_crossing(f, lo, hi):
    return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)


def naive_queue(arrivals, R, T, q0=0.0):
    """Slot-by-slot recursion, the way it is written on paper."""
    q = q0
    out = []
    for t, a in enumerate(arrivals):
        if t % T == 0:
            q = max(q + a - R * T, 0.0)
        else:
            q = q + a
        out.append(q)
    return np.array(out)
