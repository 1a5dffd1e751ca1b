"""Channel diversity-multiplexing tradeoff curves ``d_ch(r, T)``.

Each model knows its largest usable multiplexing gain ``r_max`` (where the
curve reaches zero diversity) and which coding durations ``T`` it supports.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, EmptyAdmissibleSet


def t_range(D: int) -> range:
    """Coding durations that fit the delay bound: ``1..floor(D/2)``."""
    if D < 2:
        raise DomainError(f"delay bound must be at least 2 slots, got {D}")
    return range(1, D // 2 + 1)


class _Channel:
    """Shared checks; subclasses supply ``r_max``, ``_curve`` and ``_t_ok``."""

    r_max: float

    def _curve(self, r: float, T: float) -> float:
        raise NotImplementedError

    def _t_ok(self, T: int) -> bool:
        raise NotImplementedError

    def d_ch(self, r: float, T: int) -> float:
        if not (0.0 <= r <= self.r_max):
            raise DomainError(f"r={r} outside [0, {self.r_max}]")
        if int(T) != T or not self._t_ok(int(T)):
            raise DomainError(f"coding duration T={T} not admissible for {self}")
        return self._curve(r, int(T))

    def d_ch_relaxed(self, r: float, T: float) -> float:
        """Curve value for real-valued ``T``, skipping the admissibility check."""
        r = min(max(r, 0.0), self.r_max)
        return self._curve(r, T)

    def admissible_T(self, D: int) -> list[int]:
        out = [T for T in t_range(D) if self._t_ok(T)]
        if not out:
            raise EmptyAdmissibleSet(f"no coding duration of {self} fits D={D}")
        return out

    def scales_with_T(self) -> bool:
        return False


@dataclass(frozen=True)
class SisoFastFading(_Channel):
    """Rayleigh fast fading, one antenna each side: ``d = T(1 - r)``."""

    r_max = 1.0

    def _curve(self, r, T):
        return T * (1.0 - r)

    def _t_ok(self, T):
        return T >= 1

    def scales_with_T(self):
        return True


@dataclass(frozen=True)
class MimoQuasiStatic(_Channel):
    """Quasi-static ``n_t x n_r`` Rayleigh channel, valid for ``T >= n_t``.

    The curve joins the corner points ``(k, (n_t-k)(n_r-k))``.
    """

    n_t: int
    n_r: int

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise DomainError("antenna counts must be positive")

    @property
    def r_max(self):
        return float(min(self.n_t, self.n_r))

    def corners(self):
        ks = np.arange(min(self.n_t, self.n_r) + 1, dtype=float)
        return ks, (self.n_t - ks) * (self.n_r - ks)

    def _curve(self, r, T):
        ks, ds = self.corners()
        return float(np.interp(r, ks, ds))

    def _t_ok(self, T):
        return T >= self.n_t


@dataclass(frozen=True)
class CoopOAF(_Channel):
    """Orthogonal amplify-and-forward with ``v`` relays: ``d = (v+1)(1-2r)``.

    Needs exactly ``T = 2(v+1)`` slots.
    """

    v: int
    r_max = 0.5

    def __post_init__(self):
        if self.v < 1:
            raise DomainError("need at least one relay")

    @property
    def duration(self) -> int:
        return 2 * (self.v + 1)

    def _curve(self, r, T):
        return (self.v + 1) * (1.0 - 2.0 * r)

    def _t_ok(self, T):
        return T == self.duration


@dataclass(frozen=True)
class PiecewiseLinear(_Channel):
    """Custom tradeoff through ``points``; optionally scaled by ``T``.

    ``points`` must start at ``r = 0`` and end at diversity 0, with ``r``
    strictly increasing and ``d`` strictly decreasing.
    """

    points: tuple[tuple[float, float], ...]
    multiply_by_T: bool = False

    def __post_init__(self):
        pts = tuple((float(r), float(d)) for r, d in self.points)
        object.__setattr__(self, "points", pts)
        if len(pts) < 2:
            raise DomainError("need at least two points")
        rs = [p[0] for p in pts]
        ds = [p[1] for p in pts]
        if rs[0] != 0.0:
            raise DomainError("first point must sit at r = 0")
        if any(b <= a for a, b in zip(rs, rs[1:])):
            raise DomainError("r values must be strictly increasing")
        if any(b >= a for a, b in zip(ds, ds[1:])):
            raise DomainError("d values must be strictly decreasing")
        if ds[-1] != 0.0:
            raise DomainError("last point must have zero diversity")

    @property
    def r_max(self):
        return self.points[-1][0]

    def _curve(self, r, T):
        rs, ds = zip(*self.points)
        d = float(np.interp(r, rs, ds))
        return d * T if self.multiply_by_T else d

    def _t_ok(self, T):
        return T >= 1

    def scales_with_T(self):
        return self.multiply_by_T

    @classmethod
    def from_dict(cls, doc: dict) -> PiecewiseLinear:
        dep = doc.get("t_dependence", "independent")
        if dep not in ("multiply_by_t", "independent"):
            raise DomainError(f"unknown t_dependence {dep!r}")
        try:
            points = tuple((r, d) for r, d in doc["points"])
        except (KeyError, TypeError, ValueError) as exc:
            raise DomainError("points must be a list of [r, d] pairs") from exc
        return cls(points, multiply_by_T=dep == "multiply_by_t")

    @classmethod
    def load(cls, path) -> PiecewiseLinear:
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "points": [list(p) for p in self.points],
            "t_dependence": "multiply_by_t" if self.multiply_by_T else "independent",
        }


ChannelModel = SisoFastFading | MimoQuasiStatic | CoopOAF | PiecewiseLinear


def describe(channel) -> str:
    if isinstance(channel, SisoFastFading):
        return "siso"
    if isinstance(channel, MimoQuasiStatic):
        return f"mimo{channel.n_t}x{channel.n_r}"
    if isinstance(channel, CoopOAF):
        return f"coop(v={channel.v})"
    return "piecewise"
