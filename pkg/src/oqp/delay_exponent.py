"""Decay rate of the delay-violation probability under periodic batch service.

The queue is drained by ``r*N*T`` bits every ``T`` slots and every bit must be
decoded within ``D`` slots. With ``k = D mod T`` and batch index ``t``, the
exponent is

    I(r, T) = min_t  m(t) * Lambda*(r + (D + 1 - 2T) r / m(t)),
    m(t)    = t*T + T - 1 - k  (t >= 0, m(t) > 0),

and dropping the integer constraint on ``m`` gives the lower bound
``I_ir(r, T) = delta_r * r * (D + 1 - 2T)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, ScanCapExceeded, Unstable

INF = math.inf
HYSTERESIS = 3


@dataclass(frozen=True)
class ExponentResult:
    i_exact: float
    t_argmin: int | None
    i_relaxed: float
    k: int


def _check(model, r, T, D):
    if int(T) != T or int(D) != D:
        raise DomainError("T and D must be integers")
    if not (1 <= T <= D // 2):
        raise DomainError(f"T={T} outside 1..{D // 2} for D={D}")
    if not r > model.lam:
        raise Unstable(f"r={r} does not exceed lambda={model.lam}")


def scan_cap(model, r, D) -> int:
    return int(10 * (D + 1) * max(1.0, 1.0 / (r - model.lam)))


def exponent_relaxed(model, r: float, T: int, D: int) -> float:
    """``delta_r * r * (D + 1 - 2T)``; also accepts the boundary ``2T = D + 1``."""
    if int(T) == T and int(D) == D and 2 * T == D + 1 and T >= 1:
        if not r > model.lam:
            raise Unstable(f"r={r} does not exceed lambda={model.lam}")
        return 0.0
    _check(model, r, T, D)
    return model.delta_r(r) * r * (D + 1 - 2 * T)


def exponent_exact(model, r: float, T: int, D: int) -> ExponentResult:
    """Exact integer minimization over the batch index ``t``.

    ``t -> m(t) Lambda*(r + c/m(t))`` samples the perspective of a convex
    function on an arithmetic progression, so the sequence is convex: the
    search gallops to the first non-negative forward difference, bisects back
    to it, then rescans a few neighbours on each side to absorb rounding.
    Terms where ``Lambda*`` is infinite are never selected.
    """
    _check(model, r, T, D)
    T, D = int(T), int(D)
    k = D % T
    c = (D + 1 - 2 * T) * r
    excess = r - model.lam
    cap = scan_cap(model, r, D)
    t_first = 0 if T - 1 - k > 0 else 1
    cache = {}

    def F(t):
        if t not in cache:
            m = t * T + T - 1 - k
            try:
                val = m * model.conjugate_above_mean(excess + c / m)
            except DomainError:
                val = INF
            cache[t] = val
        return cache[t]

    relaxed = model.delta_r(r) * r * (D + 1 - 2 * T)

    start = t_first
    if F(start) == INF:
        # infinite terms form a prefix; find where the finite suffix begins
        step, prev = 1, start
        while F(start + step) == INF:
            prev = start + step
            if prev > cap:
                return ExponentResult(INF, None, relaxed, k)
            step *= 2
        lo, hi = prev, start + step
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if F(mid) == INF:
                lo = mid
            else:
                hi = mid
        start = hi

    def rising(t):
        return F(t + 1) - F(t) >= 0

    if rising(start):
        t_star = start
    else:
        lo, step = start, 1
        while True:
            probe = min(start + step, cap)
            if probe == cap and not rising(probe):
                raise ScanCapExceeded(
                    f"objective still decreasing at t={probe} (cap {cap}); "
                    "the supplied Lambda may be pathological"
                )
            if rising(probe):
                hi = probe
                break
            lo, step = probe, step * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if rising(mid):
                hi = mid
            else:
                lo = mid
        t_star = hi

    window = range(max(t_first, t_star - HYSTERESIS), t_star + HYSTERESIS + 1)
    best_t = min(window, key=lambda t: (F(t), t))
    return ExponentResult(F(best_t), best_t, relaxed, k)

