"""Arrival-process statistics in the high-SNR scaling limit.

A source is described by its limiting scaled log-MGF ``Lambda(theta)`` and
its normalized mean rate ``lam`` (mean bits per slot divided by log SNR).
Everything downstream only needs ``Lambda``, its convex conjugate
``Lambda*`` (the large-deviations rate function) and the threshold
``delta_r = sup{theta > 0 : Lambda(theta) < theta r}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

from ._numerics import bisect_sign, golden_max
from .errors import DomainError, Unstable, UnsupportedModel

INF = math.inf

_CONJ_XTOL = 1e-10
_THETA_FAR = 1e12


@dataclass(frozen=True)
class CPE:
    """Compound Poisson arrivals with exponential packet sizes.

    ``Lambda(theta) = mu*lam*theta / (mu - theta)`` for ``theta < mu``.
    Larger ``1/mu`` means larger packets and burstier traffic.
    """

    lam: float
    mu: float

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not (self.mu > 0):
            raise DomainError(f"mu must be positive, got {self.mu}")

    @property
    def theta_sup(self) -> float:
        return self.mu

    def log_mgf(self, theta: float) -> float:
        if theta >= self.mu:
            return INF
        return self.mu * self.lam * theta / (self.mu - theta)

    def conjugate(self, x: float) -> float:
        if x < 0:
            raise DomainError(f"CPE rate function is defined for x >= 0, got {x}")
        return self.conjugate_above_mean(x - self.lam)

    def conjugate_above_mean(self, dx: float) -> float:
        """``Lambda*(lam + dx)``, accurate when ``dx`` is tiny."""
        x = self.lam + dx
        if x < 0:
            raise DomainError(f"CPE rate function is defined for x >= 0, got {x}")
        # (sqrt(x) - sqrt(lam))^2 without cancellation
        diff = dx / (math.sqrt(x) + math.sqrt(self.lam))
        return self.mu * diff * diff

    def delta_r(self, r: float) -> float:
        if r <= self.lam:
            raise Unstable(f"delta_r needs r > lambda ({r} <= {self.lam})")
        return self.mu * (1.0 - self.lam / r)

    def burstiness(self, g_of_N: float) -> float:
        """Std/mean of the per-slot arrivals when ``g(N) = g_of_N``."""
        if not g_of_N > 0:
            raise DomainError(f"g(N) must be positive, got {g_of_N}")
        return math.sqrt(2.0 / (self.lam * self.mu * g_of_N))


@dataclass(frozen=True)
class CustomLogMgf:
    """User-supplied ``Lambda``; conjugate and ``delta_r`` are found numerically.

    ``theta_sup`` is the right end of the finiteness domain of ``Lambda`` and
    must be declared by the caller. Steepness is not verified.
    """

    lam: float
    logmgf: Callable[[float], float] = field(repr=False)
    theta_sup: float = INF

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not self.theta_sup > 0:
            raise DomainError("theta_sup must be positive")
        at0 = self.logmgf(0.0)
        if abs(at0) > 1e-12:
            raise DomainError(f"Lambda(0) must vanish, got {at0}")
        h = 1e-6
        up, down = self.logmgf(h), self.logmgf(-h)
        slope = (up - down) / (2 * h)
        if abs(slope - self.lam) > 1e-4 * self.lam:
            raise DomainError(f"Lambda'(0) = {slope:.6g} does not match lambda = {self.lam}")
        if up + down < -1e-12:
            raise DomainError("Lambda is not convex at the origin")

    def log_mgf(self, theta: float) -> float:
        if theta >= self.theta_sup:
            return INF
        value = self.logmgf(theta)
        return INF if math.isnan(value) else value

    def _objective(self, x):
        def f(theta):
            lm = self.log_mgf(theta)
            return -INF if lm == INF else theta * x - lm

        return f

    def conjugate(self, x: float) -> float:
        f = self._objective(x)
        h = min(1.0, self.theta_sup / 2.0)
        f0 = 0.0
        if f(h) > f0:
            lo, hi = 0.0, _grow(f, h, self.theta_sup)
        elif f(-h) > f0:
            lo, hi = -_grow(lambda t: f(-t), h, INF), 0.0
        else:
            lo, hi = -h, h
        _, value = golden_max(f, lo, hi, xtol=_CONJ_XTOL)
        return max(value, 0.0)

    def conjugate_above_mean(self, dx: float) -> float:
        return self.conjugate(self.lam + dx)

    def delta_r(self, r: float) -> float:
        if r <= self.lam:
            raise Unstable(f"delta_r needs r > lambda ({r} <= {self.lam})")

        def gap(theta):
            lm = self.log_mgf(theta)
            return -INF if lm == INF else theta * r - lm

        hi = min(1.0, self.theta_sup / 2.0)
        while gap(hi) > 0:
            hi = min(2.0 * hi, self.theta_sup)
            if hi > _THETA_FAR:
                return self.theta_sup
            if hi == self.theta_sup and gap(hi * (1.0 - 1e-12)) > 0:
                # positive up to the edge of the finiteness domain
                return self.theta_sup
        lo, hi = bisect_sign(lambda t: gap(t) <= 0, 1e-12, hi, xtol=1e-10)
        return 0.5 * (lo + hi)

    def burstiness(self, g_of_N: float) -> float:
        raise UnsupportedModel("burstiness needs second-moment data only CPE provides")


def _grow(f, h, limit):
    """Double ``h`` while ``f`` keeps increasing; return the far bracket end."""
    prev = f(h)
    while True:
        nxt = 2.0 * h
        if nxt >= limit:
            return limit
        fn = f(nxt)
        if fn <= prev + 1e-13 or nxt > _THETA_FAR:
            return nxt
        h, prev = nxt, fn


ArrivalModel = CPE | CustomLogMgf


@dataclass(frozen=True)
class ScalingRegime:
    """How ``g(N)`` grows relative to ``N = log SNR``.

    ``linear`` carries ``gamma = lim g(N)/N``; ``sublinear`` means the source
    smooths too slowly (delay errors dominate), ``superlinear`` too fast
    (channel errors dominate).
    """

    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("linear", "sublinear", "superlinear"):
            raise DomainError(f"unknown regime {self.kind!r}")
        if self.kind == "linear" and not (self.gamma is not None and self.gamma > 0):
            raise DomainError("linear regime needs gamma > 0")

    @classmethod
    def linear(cls, gamma: float) -> ScalingRegime:
        return cls("linear", float(gamma))

    @classmethod
    def parse(cls, text: str) -> ScalingRegime:
        """Parse ``linear:<gamma>``, ``sublinear`` or ``superlinear``."""
        name, _, arg = text.partition(":")
        if name == "linear":
            try:
                return cls.linear(float(arg) if arg else 1.0)
            except ValueError as exc:
                raise DomainError(f"bad gamma in {text!r}") from exc
        return cls(name)
