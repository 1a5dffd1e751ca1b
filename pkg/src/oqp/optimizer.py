"""Rate and coding-duration choices that balance channel and delay errors.

With ``g(N)/N -> gamma`` the total error probability decays like
``SNR^-min(gamma*I(r,T), d_ch(r,T))``. For each coding duration the best rate
is where the two exponents cross; the best duration maximizes the exponent at
that crossing. Under other scalings only one error type matters and the
module reports an upper bound instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from ._numerics import bisect_sign, golden_max
from .delay_exponent import exponent_exact, exponent_relaxed
from .dmt_models import CoopOAF, SisoFastFading
from .errors import DomainError, EmptyAdmissibleSet, NoCrossing, Unstable
from .rate_models import CPE, ScalingRegime

BISECT_XTOL = 1e-13
TIE_RTOL = 1e-12


@dataclass(frozen=True)
class TRow:
    T: int
    r_star_of_T: float
    gamma_I: float
    d_ch: float
    bracket: tuple[float, float]
    v: int | None = None


@dataclass(frozen=True)
class Relaxed:
    d_ir: float
    r_ir: float
    t_ir: float
    v_ir: float | None = None


@dataclass
class OptimizationResult:
    regime: str
    d_star: float | None = None
    r_star: float | None = None
    t_star: int | None = None
    v_star: int | None = None
    per_t_table: list[TRow] = field(default_factory=list)
    relaxed: Relaxed | None = None
    case_bound: float | None = None
    exact_I: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


def _delay_exponent(model, r, T, D, use_relaxed_I):
    if use_relaxed_I:
        return exponent_relaxed(model, r, T, D)
    return exponent_exact(model, r, T, D).i_exact


def crossing_bracket(model, channel, gamma, T, D, use_relaxed_I=True, xtol=BISECT_XTOL):
    """Bracket ``[lo, hi]`` around ``r*(T)``.

    ``gamma*I - d_ch`` is negative at ``lo`` and non-negative at ``hi``. The
    left end starts at ``lambda`` where the delay exponent vanishes.
    """
    lam, r_max = model.lam, channel.r_max
    if not lam < r_max:
        raise Unstable(f"lambda={lam} must be below r_max={r_max}")
    if gamma <= 0:
        raise DomainError("gamma must be positive")
    if channel.d_ch(lam, T) <= 0:
        raise NoCrossing(f"d_ch(lambda, {T}) is not positive")

    def balanced(r):
        return gamma * _delay_exponent(model, r, T, D, use_relaxed_I) - channel.d_ch(r, T) >= 0

    if not balanced(r_max):
        raise NoCrossing(f"delay exponent never reaches the channel curve for T={T}")
    return bisect_sign(balanced, lam, r_max, xtol=xtol)


def r_star_of_T(model, channel, gamma, T, D, use_relaxed_I=True, xtol=BISECT_XTOL) -> float:
    lo, hi = crossing_bracket(model, channel, gamma, T, D, use_relaxed_I, xtol)
    return 0.5 * (lo + hi)


def _row(model, channel, gamma, T, D, use_relaxed_I, v=None):
    lo, hi = crossing_bracket(model, channel, gamma, T, D, use_relaxed_I)
    r = 0.5 * (lo + hi)
    gI = gamma * _delay_exponent(model, r, T, D, use_relaxed_I)
    return TRow(T, r, gI, channel.d_ch(r, T), (lo, hi), v)


def _argmax(rows):
    # ties (up to rounding) go to the earliest row, i.e. the smallest T
    best = rows[0]
    for row in rows[1:]:
        if row.gamma_I > best.gamma_I * (1 + TIE_RTOL) + 1e-300:
            best = row
    return best


def optimize_case1(model, channel, gamma, D, use_relaxed_I=False, fixed_T=None) -> OptimizationResult:
    """Balanced optimum when ``g(N)/N -> gamma``.

    ``fixed_T`` restricts the search to one coding duration.
    """
    if isinstance(channel, CoopOAF):
        return optimize_coop(model, gamma, D, channel.v, use_relaxed_I)
    Ts = channel.admissible_T(D)
    if fixed_T is not None:
        if fixed_T not in Ts:
            raise DomainError(f"T={fixed_T} is not admissible for D={D}")
        Ts = [fixed_T]
    rows = [_row(model, channel, gamma, T, D, use_relaxed_I) for T in Ts]
    best = _argmax(rows)
    if fixed_T is not None:
        r_ir = r_star_of_T(model, channel, gamma, fixed_T, D, use_relaxed_I=True)
        relaxed = Relaxed(channel.d_ch(r_ir, fixed_T), r_ir, float(fixed_T))
    else:
        relaxed = relaxed_optimum(model, channel, gamma, D)
    return OptimizationResult(
        regime=f"linear:{gamma:g}",
        d_star=best.d_ch,
        r_star=best.r_star_of_T,
        t_star=best.T,
        per_t_table=rows,
        relaxed=relaxed,
        exact_I=not use_relaxed_I,
    )


def optimize_coop(model, gamma, D, v_max, use_relaxed_I=False) -> OptimizationResult:
    """Cluster-size search for amplify-and-forward relaying.

    Each relay count ``v`` fixes ``T = 2(v+1)``; counts whose duration does
    not fit the delay bound are skipped.
    """
    rows = []
    for v in range(1, v_max + 1):
        ch = CoopOAF(v)
        if ch.duration > D // 2:
            continue
        rows.append(_row(model, ch, gamma, ch.duration, D, use_relaxed_I, v=v))
    if not rows:
        raise EmptyAdmissibleSet(f"no relay count up to {v_max} fits D={D}")
    best = _argmax(rows)
    if isinstance(model, CPE):
        relaxed = coop_closed_forms(model.lam, gamma * model.mu, D, v_max)
    else:
        relaxed = coop_relaxed(model, gamma, D, v_max)
    return OptimizationResult(
        regime=f"linear:{gamma:g}",
        d_star=best.d_ch,
        r_star=best.r_star_of_T,
        t_star=best.T,
        v_star=best.v,
        per_t_table=rows,
        relaxed=relaxed,
        exact_I=not use_relaxed_I,
    )


def _relaxed_rate(model, channel, gamma, T, D):
    """Real-valued ``T`` version of the relaxed crossing (no admissibility)."""
    lam, r_max = model.lam, channel.r_max
    slack = D + 1 - 2 * T

    def balanced(r):
        return gamma * model.delta_r(r) * r * slack - channel.d_ch_relaxed(r, T) >= 0

    if slack <= 0 or not balanced(r_max):
        return r_max
    lo, hi = bisect_sign(balanced, lam, r_max, xtol=BISECT_XTOL)
    return 0.5 * (lo + hi)


def relaxed_optimum(model, channel, gamma, D) -> Relaxed:
    """Integer-relaxed optimum found numerically over real ``T``.

    Maximizes ``d_ch(r_ir(T), T)`` over ``0 < T < (D+1)/2`` and clamps the
    maximizer to the admissible durations. SISO with CPE traffic uses the
    closed forms instead.
    """
    if isinstance(channel, SisoFastFading) and isinstance(model, CPE):
        return siso_closed_forms(model.lam, gamma * model.mu, D)
    Ts = channel.admissible_T(D)

    def value(T):
        return channel.d_ch_relaxed(_relaxed_rate(model, channel, gamma, T, D), T)

    t_opt, _ = golden_max(value, 1e-9, (D + 1) / 2.0, xtol=1e-9)
    t_ir = min(max(t_opt, float(Ts[0])), float(Ts[-1]))
    r_ir = _relaxed_rate(model, channel, gamma, t_ir, D)
    return Relaxed(channel.d_ch_relaxed(r_ir, t_ir), r_ir, t_ir)


def coop_relaxed(model, gamma, D, v_max) -> Relaxed:
    """Numerical counterpart of :func:`coop_closed_forms` for any source."""

    def rate(v):
        return _coop_rate(model, gamma, v, D)

    def value(v):
        return (v + 1) * (1 - 2 * rate(v))

    v_hi = (D + 1) / 4.0 - 1.0
    v_opt, _ = golden_max(value, 0.0, v_hi, xtol=1e-9)
    v_ir = min(max(v_opt, 1.0), float(v_max))
    r_ir = rate(v_ir)
    return Relaxed((v_ir + 1) * (1 - 2 * r_ir), r_ir, 2 * (v_ir + 1), v_ir)


def _coop_rate(model, gamma, v, D):
    slack = D + 1 - 4 * (v + 1)
    lam = model.lam

    def balanced(r):
        return gamma * model.delta_r(r) * r * slack - (v + 1) * (1 - 2 * r) >= 0

    if slack <= 0:
        return 0.5
    lo, hi = bisect_sign(balanced, lam, 0.5, xtol=BISECT_XTOL)
    return 0.5 * (lo + hi)


def _rstar_siso(lam, mu, D, T):
    return lam + (1 - lam) / (1 + mu * (D + 1 - 2 * T) / T)


def siso_closed_forms(lam, mu, D) -> Relaxed:
    """Relaxed optimum for SISO fast fading with CPE traffic (``g(N) = N``).

    For ``g(N)/N -> gamma`` pass ``gamma * mu``.
    """
    if not (0 < lam < 1) or mu <= 0 or D < 2:
        raise DomainError("need 0 < lambda < 1, mu > 0, D >= 2")
    s = math.sqrt(2 * mu)
    t_top = D // 2
    t_ir = min(max((D + 1) / 2 / (1 + 1 / s), 1.0), float(t_top))
    r_lo, r_hi = _rstar_siso(lam, mu, D, 1), _rstar_siso(lam, mu, D, t_top)
    r_ir = min(max(lam + (1 - lam) / (1 + s), r_lo), r_hi)
    return Relaxed(t_ir * (1 - r_ir), r_ir, t_ir)


def coop_closed_forms(lam, mu, D, v_max) -> Relaxed:
    """Relaxed cluster size and rate for amplify-and-forward relaying."""
    if not (0 < lam < 0.5) or mu <= 0 or v_max < 1:
        raise DomainError("need 0 < lambda < 1/2, mu > 0, v_max >= 1")
    a = 1 + 1 / math.sqrt(2 * mu)
    v_ir = min(max((D + 1) / (4 * a) - 1, 1.0), float(v_max))
    r_ir = 0.5 - (0.5 - lam) / a
    return Relaxed((v_ir + 1) * (1 - 2 * r_ir), r_ir, 2 * (v_ir + 1), v_ir)


def mimo22_r_ir(lam, mu, D) -> float:
    """Relaxed balanced rate on the 2x2 quasi-static channel with ``T = 2``."""
    if not (0 < lam < 2) or mu <= 0 or D <= 3:
        raise DomainError("need 0 < lambda < 2, mu > 0, D > 3")
    load = mu * (D - 3)
    if lam >= 1 - 1 / load:
        return lam + (2 - lam) / (1 + load)
    return lam + (4 - 3 * lam) / (3 + load)


def classify_and_bound(model, channel, regime: ScalingRegime, D) -> OptimizationResult:
    """Route by scaling regime; non-linear regimes yield an upper bound only."""
    if regime.kind == "linear":
        return optimize_case1(model, channel, regime.gamma, D)
    Ts = channel.admissible_T(D)
    if not model.lam < channel.r_max:
        raise Unstable(f"lambda={model.lam} must be below r_max={channel.r_max}")
    if regime.kind == "sublinear":
        r = channel.r_max
        rows = []
        for T in Ts:
            I = exponent_exact(model, r, T, D).i_exact
            rows.append(TRow(T, r, I, channel.d_ch(r, T), (r, r)))
        best = _argmax(rows)
        return OptimizationResult("sublinear", t_star=best.T, per_t_table=rows, case_bound=best.gamma_I)
    T = Ts[-1]
    return OptimizationResult("superlinear", t_star=T, case_bound=channel.d_ch(model.lam, T))


def p_tot_exponent(model, channel, gamma, r, T, D) -> float:
    """SNR exponent of the total bit-loss probability at a given operating point."""
    return min(gamma * exponent_exact(model, r, T, D).i_exact, channel.d_ch(r, T))


__all__ = [
    "OptimizationResult",
    "Relaxed",
    "TRow",
    "classify_and_bound",
    "coop_closed_forms",
    "coop_relaxed",
    "crossing_bracket",
    "mimo22_r_ir",
    "optimize_case1",
    "optimize_coop",
    "p_tot_exponent",
    "r_star_of_T",
    "relaxed_optimum",
    "siso_closed_forms",
]
