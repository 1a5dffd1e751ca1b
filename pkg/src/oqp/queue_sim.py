"""Monte Carlo and exact evaluation of the batch-service queue.

Time is slotted. ``A_t`` bits arrive in slot ``t``; at every slot ``t = mT``
the oldest ``R*T`` bits leave in one batch (the queue is padded with null bits
if it runs short, i.e. the workload is clipped at zero). The last bit arriving
in phase ``i = t mod T`` misses the deadline iff

    T - i + ceil(Q_t / (R T)) * T > D.

The delay-violation probability is the average over phases of the fraction
of slots (among those with at least one arrival) whose last bit is late. The
bit-level variant, where a uniformly chosen bit of the slot is tested, is
reported alongside.

Random numbers come from numpy's Philox counter-based generator; replication
``j`` uses key ``seed XOR j`` so runs are reproducible and independent of how
replications are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .delay_exponent import exponent_exact
from .errors import CapTooSmall, DomainError, NonPositiveService, Unstable
from .rate_models import CPE

CHUNK_SLOTS = 1 << 20
Z95 = 1.959963984540054
MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    model: CPE
    N: float
    g_of_N: float
    r: float
    T: int
    D: int
    measure_slots: int
    seed: int = 0
    replications: int = 10
    warmup_slots: int | None = None

    def __post_init__(self):
        if not isinstance(self.model, CPE):
            raise DomainError("Monte Carlo needs a CPE source")
        if self.r <= self.model.lam:
            raise Unstable(f"r={self.r} does not exceed lambda={self.model.lam}")
        if self.N <= 0 or self.g_of_N <= 0:
            raise DomainError("N and g(N) must be positive")
        if not (1 <= self.T <= self.D // 2):
            raise DomainError(f"T={self.T} outside 1..{self.D // 2}")
        if self.measure_slots <= 0 or self.measure_slots % self.T:
            raise DomainError("measure_slots must be a positive multiple of T")
        if self.replications < 1:
            raise DomainError("need at least one replication")
        if not 0 <= self.seed <= MASK64:
            raise DomainError("seed must fit in 64 bits")

    @property
    def service_per_slot(self) -> float:
        return self.r * self.N

    @property
    def warmup(self) -> int:
        if self.warmup_slots is not None:
            w = self.warmup_slots
        else:
            w = 100 * self.T * math.ceil(1.0 / (self.r - self.model.lam))
        return -(-w // self.T) * self.T


@dataclass
class SimReport:
    p_delay_hat: float
    ci95_half_width: float
    empirical_exponent: float
    predicted_exponent: float | None
    per_phase_violation: list[float]
    slots_observed: int
    p_delay_random_bit: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    CSV_HEADER = "N,r,T,D,p_delay_hat,ci95,emp_exp,pred_exp,slots"

    def csv_row(self, N, r, T, D) -> str:
        vals = [N, r, T, D, self.p_delay_hat, self.ci95_half_width,
                self.empirical_exponent, self.predicted_exponent, self.slots_observed]
        return ",".join(_fmt(v) for v in vals)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{v:.9g}"


@dataclass(frozen=True)
class Lemma3Record:
    dominant_phase: int
    threshold_dominant: float
    p_overflow: float
    phase_overflow: list[float]
    ratio: float
    p_delay_hat: float

    def to_dict(self) -> dict:
        return asdict(self)


def rng_for(seed: int, replication: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=(seed ^ replication) & MASK64))


def cpe_sampler(model: CPE, N: float, g_of_N: float):
    """Per-slot CPE arrivals: Poisson packet count, exponential packet sizes."""
    rate = model.mu * model.lam * g_of_N
    mean_size = N / (model.mu * g_of_N)

    def draw(rng, n):
        packets = rng.poisson(rate, n)
        return rng.gamma(packets, mean_size)

    return draw


def pmf_sampler(pmf: dict):
    values = np.array(sorted(pmf), dtype=float)
    probs = np.array([pmf[v] for v in sorted(pmf)], dtype=float)

    def draw(rng, n):
        return rng.choice(values, size=n, p=probs)

    return draw


def queue_path(arrivals, R, T, q_before=0.0):
    """Queue contents after each slot of ``arrivals``.

    ``arrivals`` starts at a service slot and its length is a multiple of
    ``T``. ``q_before`` is the backlog just before the first slot. Returns the
    per-slot queue and the backlog after the last slot.
    """
    A = np.asarray(arrivals, dtype=float).reshape(-1, T)
    batch = R * T
    carried = A[:, 1:].sum(axis=1)
    # net input between consecutive service instants
    W = A[:, 0] - batch
    W[1:] += carried[:-1]
    S = np.cumsum(W)
    Z = S - np.minimum(np.minimum.accumulate(S), -q_before)
    np.maximum(Z, 0.0, out=Z)
    Q = np.empty_like(A)
    Q[:, 0] = Z
    if T > 1:
        Q[:, 1:] = Z[:, None] + np.cumsum(A[:, 1:], axis=1)
    return Q.ravel(), float(Q[-1, -1])


def violates(Q, phase, R, T, D):
    """Deadline test for the last bit of a slot in the given phase."""
    return T - phase + np.ceil(Q / (R * T)) * T > D


def phase_thresholds(R, T, D):
    """Backlog above which phase ``i`` misses the deadline."""
    return np.array([R * T * math.floor((D + i - T) / T) for i in range(T)], dtype=float)


def _replicate(draw, R, T, D, warmup, measure, rng):
    """One independent run; returns per-phase sums over the measured slots."""
    phases = np.arange(T)
    thr = phase_thresholds(R, T, D)
    stats = {name: np.zeros(T) for name in
             ("busy", "late", "bits", "random_bits", "overflow", "slots")}
    q = 0.0
    done = 0
    total = warmup + measure
    step = max(T, (CHUNK_SLOTS // T) * T)
    while done < total:
        n = min(step, total - done)
        A = draw(rng, n)
        Q, q = queue_path(A, R, T, q)
        skip = max(0, warmup - done)
        done += n
        if skip >= n:
            continue
        A2 = A[skip:].reshape(-1, T)
        Q2 = Q[skip:].reshape(-1, T)
        viol = violates(Q2, phases[None, :], R, T, D)
        with np.errstate(divide="ignore", invalid="ignore"):
            frac = np.where(A2 > 0, np.clip((Q2 - thr) / A2, 0.0, 1.0), 0.0)
        busy = A2 > 0
        stats["busy"] += busy.sum(axis=0)
        stats["late"] += (busy & viol).sum(axis=0)
        stats["bits"] += A2.sum(axis=0)
        stats["random_bits"] += (A2 * frac).sum(axis=0)
        stats["overflow"] += (Q2 > thr).sum(axis=0)
        stats["slots"] += A2.shape[0]
    return stats


def _phase_freq(late, busy):
    return late / np.where(busy > 0, busy, 1.0)


def _aggregate(reps):
    per_rep = np.array([_phase_freq(s["late"], s["busy"]).mean() for s in reps])
    p_hat = float(per_rep.mean())
    if len(per_rep) > 1:
        ci = float(Z95 * per_rep.std(ddof=1) / math.sqrt(len(per_rep)))
    else:
        ci = math.inf
    per_phase = _phase_freq(sum(s["late"] for s in reps), sum(s["busy"] for s in reps)).tolist()
    bits = sum(s["bits"].sum() for s in reps)
    random_bit = float(sum(s["random_bits"].sum() for s in reps) / bits) if bits > 0 else 0.0
    return p_hat, ci, per_phase, random_bit


def _run(draw, R, T, D, warmup, measure, seed, replications):
    if R * T <= 0:
        raise NonPositiveService("service per batch must be positive")
    return [_replicate(draw, R, T, D, warmup, measure, rng_for(seed, j)) for j in range(replications)]


def simulate(config: SimConfig) -> SimReport:
    cfg = config
    draw = cpe_sampler(cfg.model, cfg.N, cfg.g_of_N)
    reps = _run(draw, cfg.service_per_slot, cfg.T, cfg.D, cfg.warmup, cfg.measure_slots,
                cfg.seed, cfg.replications)
    p_hat, ci, per_phase, random_bit = _aggregate(reps)
    emp = -math.log(p_hat) / cfg.g_of_N if p_hat > 0 else math.inf
    pred = exponent_exact(cfg.model, cfg.r, cfg.T, cfg.D).i_exact
    return SimReport(p_hat, ci, emp, pred, per_phase, cfg.measure_slots * cfg.replications, random_bit)


def simulate_discrete(pmf: dict, R, T, D, measure_slots, seed=0, replications=10, warmup_slots=None) -> SimReport:
    """Same estimator driven by an integer-valued arrival pmf (no scaling)."""
    _check_pmf(pmf, R)
    if measure_slots % T:
        raise DomainError("measure_slots must be a multiple of T")
    warmup = 1000 * T if warmup_slots is None else -(-warmup_slots // T) * T
    reps = _run(pmf_sampler(pmf), R, T, D, warmup, measure_slots, seed, replications)
    p_hat, ci, per_phase, random_bit = _aggregate(reps)
    emp = -math.log(p_hat) if p_hat > 0 else math.inf
    return SimReport(p_hat, ci, emp, None, per_phase, measure_slots * replications, random_bit)


def lemma3_check(config: SimConfig) -> Lemma3Record:
    """Compare the delay-violation estimate with the dominant-phase overflow.

    ``phase_overflow[i]`` is the fraction of phase-``i`` slots whose backlog
    exceeds that phase's deadline threshold. ``ratio`` is their sum divided
    by the overflow frequency of phase ``T-1-k``; it lies in ``[1, T]``.
    """
    cfg = config
    T, D = cfg.T, cfg.D
    R = cfg.service_per_slot
    draw = cpe_sampler(cfg.model, cfg.N, cfg.g_of_N)
    reps = _run(draw, R, T, D, cfg.warmup, cfg.measure_slots, cfg.seed, cfg.replications)
    p_hat, _, _, _ = _aggregate(reps)
    overflow = sum(s["overflow"] for s in reps) / sum(s["slots"] for s in reps)
    k = D % T
    dom = T - 1 - k
    p_over = float(overflow[dom])
    ratio = float(overflow.sum() / p_over) if p_over > 0 else math.nan
    return Lemma3Record(dom, (D - T - k) * R, p_over, overflow.tolist(), ratio, p_hat)


def _check_pmf(pmf, R):
    if not R > 0:
        raise NonPositiveService(f"service per slot must be positive, got {R}")
    if not pmf:
        raise DomainError("empty arrival pmf")
    if any(int(a) != a or a < 0 for a in pmf) or any(p < 0 for p in pmf.values()):
        raise DomainError("pmf needs non-negative integer values and probabilities")
    if abs(sum(pmf.values()) - 1.0) > 1e-9:
        raise DomainError("pmf probabilities must sum to 1")
    mean = sum(a * p for a, p in pmf.items())
    if not mean < R:
        raise Unstable(f"mean arrivals {mean} must be below service {R}")
    return mean


def exact_discrete_oracle(pmf: dict, R: int, T: int, D: int, q_cap: int,
                          tol: float = 1e-12, max_periods: int = 1_000_000) -> float:
    """Exact last-bit violation probability for integer arrivals.

    Averages, over the ``T`` phases, the probability that the last bit of a
    slot with at least one arrival is late.

    Iterates the distribution of the backlog, period by period, on
    ``{0..q_cap}`` until the total-variation change per period is below
    ``tol``. Raises :class:`CapTooSmall` if more than ``1e-12`` of mass would
    be cut off at ``q_cap``.
    """
    _check_pmf(pmf, R)
    if int(R) != R:
        raise DomainError("R must be an integer")
    if not (1 <= T <= D // 2):
        raise DomainError(f"T={T} outside 1..{D // 2}")
    busy = sum(p for a, p in pmf.items() if a > 0)
    if busy == 0:
        return 0.0
    support = sorted(a for a, p in pmf.items() if p > 0)
    a_pmf = np.zeros(int(support[-1]) + 1)
    for a in support:
        a_pmf[int(a)] = pmf[a]
    batch = int(R) * T
    size = q_cap + 1

    def trim(dist):
        cut = dist[size:].sum()
        if cut > 1e-12:
            raise CapTooSmall(f"{cut:.3g} of probability mass above q_cap={q_cap}")
        return dist[:size]

    def serve(dist):
        out = np.zeros(size)
        out[0] = dist[: batch + 1].sum()
        out[1 : max(0, len(dist) - batch)] = dist[batch + 1 :][: size - 1]
        return out

    def period(pi):
        d = trim(np.convolve(pi, a_pmf))
        d = serve(d)
        for _ in range(1, T):
            d = trim(np.convolve(d, a_pmf))
        return d

    pi = np.zeros(size)
    pi[0] = 1.0
    for _ in range(max_periods):
        nxt = period(pi)
        change = 0.5 * np.abs(nxt - pi).sum()
        pi = nxt
        if change < tol:
            break
    else:
        raise CapTooSmall("backlog distribution did not settle")

    qs = np.arange(size + len(a_pmf))
    late_total = 0.0
    before = pi
    for phase in range(T):
        for a in support:
            if a == 0:
                continue
            q_after = qs[: size] + int(a)
            if phase == 0:
                q_after = np.maximum(q_after - batch, 0)
            late = T - phase + (-(-q_after // batch)) * T > D
            late_total += pmf[a] * before[late].sum()
        d = trim(np.convolve(before, a_pmf))
        before = serve(d) if phase == 0 else d
    return float(late_total / (T * busy))
