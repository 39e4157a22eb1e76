"""Linear birth-death processes with piecewise-constant rates.

Over ``[t0, t]`` a single ancestor leaves a linear-fractional number of
descendants with

    rho(t0, t) = int_{t0}^t (mu - lambda) du
    q(t0, t)   = 1 / (1 + int_{t0}^t exp(rho(t0, u)) mu(u) du)
    p(t0, t)   = exp(rho(t0, t)) q(t0, t)

so that ``E s^Z(t) = 1 - q + q p s / (1 - (1 - p) s)``. Integer time cuts
give a GW process in varying environment with LF reproduction.

Random streams for the simulator are keyed by ``(seed, step, replicate)``
with the birth-death tag, one Philox block per step.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import rng
from ._parallel import parallel_map
from .core import GwdualError
from .laws import LinearFractionalLaw, LinearFractionalParams
from .stats import proportion_test

DEFAULT_PANELS = 2**12
DEFAULT_POPULATION_CAP = 10**6


class InvalidRates(GwdualError, ValueError):
    pass


class SimOverflow(GwdualError, OverflowError):
    pass


class PiecewiseConstant:
    """Right-continuous step function.

    ``values[i]`` holds on ``[starts[i], starts[i+1])``; the first value also
    extends to the left of ``starts[0]`` and the last one to the right.
    """

    def __init__(self, starts, values):
        starts = np.atleast_1d(np.asarray(starts, dtype=float))
        values = np.atleast_1d(np.asarray(values, dtype=float))
        if starts.shape != values.shape or starts.size == 0:
            raise InvalidRates("need matching, non-empty breakpoint and value lists")
        if np.any(np.diff(starts) <= 0):
            raise InvalidRates("breakpoints must be strictly increasing")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise InvalidRates(f"rates must be finite and non-negative, got {values.tolist()}")
        self.starts = starts
        self.values = values

    @classmethod
    def constant(cls, value):
        return cls([0.0], [value])

    @classmethod
    def parse(cls, text):
        """Read ``"bp:val,bp:val,..."`` (a bare number means a constant)."""
        text = str(text).strip()
        try:
            if ":" not in text:
                return cls.constant(float(text))
            pairs = [item.split(":") for item in text.split(",") if item.strip()]
            starts, values = zip(*((float(b), float(v)) for b, v in pairs))
        except ValueError as exc:
            raise InvalidRates(f"cannot parse rate list {text!r}: {exc}") from None
        return cls(starts, values)

    def __call__(self, t):
        i = np.searchsorted(self.starts, t, side="right") - 1
        return self.values[np.clip(i, 0, self.values.size - 1)]

    def to_config(self):
        return [[float(b), float(v)] for b, v in zip(self.starts, self.values)]


@dataclass(frozen=True)
class RateSchedule:
    """Per-individual birth rate ``lambda(t)`` and death rate ``mu(t)``."""

    birth: PiecewiseConstant
    death: PiecewiseConstant

    @classmethod
    def constant(cls, lam, mu):
        return cls(PiecewiseConstant.constant(lam), PiecewiseConstant.constant(mu))

    @classmethod
    def parse(cls, lam, mu):
        return cls(PiecewiseConstant.parse(lam), PiecewiseConstant.parse(mu))

    def breakpoints(self, t0, t1):
        """Sorted cut points of both schedules strictly inside ``(t0, t1)``."""
        cuts = np.union1d(self.birth.starts, self.death.starts)
        return cuts[(cuts > t0) & (cuts < t1)]

    def pieces(self, t0, t1):
        """``(start, end, lambda, mu)`` for each constant piece of ``[t0, t1)``."""
        edges = np.concatenate([[t0], self.breakpoints(t0, t1), [t1]])
        return [(float(a), float(b), float(self.birth(a)), float(self.death(a)))
                for a, b in zip(edges[:-1], edges[1:])]

    def to_config(self):
        return {"lambda": self.birth.to_config(), "mu": self.death.to_config()}


@dataclass(frozen=True)
class KendallParams:
    rho: float
    q: float
    p: float

    def law(self):
        return LinearFractionalParams(self.p, self.q)

    def to_dict(self):
        return {"rho": self.rho, "q": self.q, "p": self.p}


def _simpson_piece(lo, hi, rho_lo, slope, mu, panels):
    # int_lo^hi exp(rho_lo + slope (u - lo)) mu du
    if mu == 0.0 or hi <= lo:
        return 0.0
    panels = max(2, panels + panels % 2)
    u = np.linspace(lo, hi, panels + 1)
    return float(integrate.simpson(np.exp(rho_lo + slope * (u - lo)) * mu, x=u))


def kendall_params(rates, t0, t, panels=DEFAULT_PANELS):
    """Kendall's LF parameters of one ancestor's progeny over ``[t0, t]``.

    ``rho`` is integrated exactly piece by piece; the outer integral uses
    composite Simpson with ``panels`` panels on every constant piece.

    >>> k = kendall_params(RateSchedule.constant(1.0, 1.0), 0.0, 2.0)
    >>> round(k.q, 12), round(k.p, 12)
    (0.333333333333, 0.333333333333)
    """
    if t < t0:
        raise ValueError(f"need t0 <= t, got t0={t0}, t={t}")
    rho = 0.0
    inner = 0.0
    for lo, hi, lam, mu in rates.pieces(t0, t):
        slope = mu - lam
        inner += _simpson_piece(lo, hi, rho, slope, mu, panels)
        rho += slope * (hi - lo)
    q = 1.0 / (1.0 + inner)
    return KendallParams(float(rho), float(q), float(np.exp(rho) * q))


# ---------------------------------------------------------------------------
# simulation


@dataclass
class BirthDeathPath:
    """Outcome of one replicate; ``events`` lists ``(time, +1|-1, size after)``."""

    t0: float
    t1: float
    z0: int
    final: int
    steps: int
    events: list = field(default_factory=list)


def _run(rates, t0, t1, z0, seed, replicates, cap, log=None):
    """Lockstep Gillespie over replicate streams.

    Each loop pass consumes one draw per active replicate: the waiting time
    from ``u0`` and the event type from ``u1``. A waiting time that crosses
    the end of the current constant piece advances the clock to the cut
    without an event (memorylessness makes this exact).
    """
    replicates = np.asarray(replicates, dtype=np.int64)
    n = np.full(replicates.size, int(z0), dtype=np.int64)
    now = np.full(replicates.size, float(t0))
    step = np.zeros(replicates.size, dtype=np.int64)
    pieces = rates.pieces(t0, t1)
    ends = np.array([p[1] for p in pieces])
    lam = np.array([p[2] for p in pieces])
    mu = np.array([p[3] for p in pieces])
    piece = np.zeros(replicates.size, dtype=np.int64)
    active = (n > 0) & (t1 > t0)
    while active.any():
        idx = np.flatnonzero(active)
        pc = piece[idx]
        lam_i, mu_i, end_i = lam[pc], mu[pc], ends[pc]
        total = n[idx] * (lam_i + mu_i)
        idle = total == 0
        # a quiet piece is skipped without consuming a draw
        now[idx[idle]] = end_i[idle]
        piece[idx[idle]] += 1
        go = idx[~idle]
        if go.size:
            g = ~idle
            u0, u1 = rng.uniforms(seed, step[go], replicates[go], 0, rng.TAG_BIRTH_DEATH)
            step[go] += 1
            wait = -np.log1p(-u0) / total[g]
            arrive = now[go] + wait
            cross = arrive >= end_i[g]
            now[go[cross]] = end_i[g][cross]
            piece[go[cross]] += 1
            hit = go[~cross]
            now[hit] = arrive[~cross]
            birth = u1[~cross] < lam_i[g][~cross] / (lam_i[g][~cross] + mu_i[g][~cross])
            n[hit] += np.where(birth, 1, -1)
            if log is not None:
                for i, b in zip(hit.tolist(), birth.tolist()):
                    log[i].append((float(now[i]), 1 if b else -1, int(n[i])))
            if hit.size and n[hit].max() > cap:
                raise SimOverflow(f"population {int(n[hit].max())} exceeds cap {cap}")
        active = (n > 0) & (piece < len(pieces))
    return n, step


def simulate_bd(rates, t0, t1, z0, seed, replicate=0, cap=DEFAULT_POPULATION_CAP):
    """Exact event-driven simulation of one replicate from ``z0`` at ``t0``."""
    if z0 < 0:
        raise ValueError(f"initial population must be non-negative, got {z0}")
    if t1 < t0:
        raise ValueError(f"need t0 <= t1, got t0={t0}, t1={t1}")
    log = [[]]
    n, step = _run(rates, t0, t1, z0, seed, [replicate], cap, log)
    return BirthDeathPath(float(t0), float(t1), int(z0), int(n[0]), int(step[0]), log[0])


def simulate_bd_counts(rates, t0, t1, z0, seed, samples, cap=DEFAULT_POPULATION_CAP,
                       threads=None, chunk=8192):
    """Final counts of replicates ``0..samples-1``; identical to :func:`simulate_bd`."""
    if z0 < 0:
        raise ValueError(f"initial population must be non-negative, got {z0}")
    starts = range(0, int(samples), chunk)
    parts = parallel_map(
        lambda s: _run(rates, t0, t1, z0, seed, np.arange(s, min(s + chunk, samples)), cap)[0],
        starts, threads)
    return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)


# ---------------------------------------------------------------------------
# discrete skeleton


@dataclass(frozen=True)
class EmbeddedLF:
    """Per-generation LF parameters of the integer-time skeleton.

    Entry ``i`` is labelled ``t = t_start + i + 1`` and comes from the
    interval ``[t - 1, t]``; in GW time it drives generation
    ``t_start + i``, i.e. ``Z_{t-1} -> Z_t``.
    """

    t_start: int
    p: tuple
    q: tuple
    rho: tuple

    @property
    def t_end(self):
        return self.t_start + len(self.p)

    def law(self):
        return LinearFractionalLaw(list(self.p), list(self.q), t_origin=self.t_start)

    def to_dict(self):
        return {"t_start": self.t_start, "t_end": self.t_end,
                "p": list(self.p), "q": list(self.q), "rho": list(self.rho)}


def embedded_lf_grid(rates, t_start, t_end, panels=DEFAULT_PANELS):
    t_start, t_end = int(t_start), int(t_end)
    if t_end <= t_start:
        raise ValueError(f"need t_start < t_end, got [{t_start}, {t_end})")
    ks = [kendall_params(rates, t, t + 1, panels) for t in range(t_start, t_end)]
    return EmbeddedLF(t_start, tuple(k.p for k in ks), tuple(k.q for k in ks),
                      tuple(k.rho for k in ks))


def chaining_error(rates, t0, length=2, panels=DEFAULT_PANELS, s_values=None):
    """Max gap between the composed unit-step pgfs and Kendall over ``[t0, t0+length]``."""
    from .laws import ve_pgf_compose

    t0 = int(t0)
    law = embedded_lf_grid(rates, t0, t0 + length, panels).law()
    whole = kendall_params(rates, t0, t0 + length, panels).law()
    s = np.linspace(0.0, 1.0, 21) if s_values is None else np.asarray(s_values, dtype=float)
    composed = np.array([ve_pgf_compose(law, t0, t0 + length, float(v)) for v in s])
    direct = np.array([whole.pgf(float(v)) for v in s])
    return float(np.max(np.abs(composed - direct)))


def mc_comparison(rates, t0, t1, samples=100_000, seed=0, panels=DEFAULT_PANELS,
                  n_se=4.0, min_expected=5.0, threads=None):
    """Empirical pmf of ``Z(t1) | Z(t0) = 1`` against the Kendall LF pmf.

    Every ``k`` with expected count at least ``min_expected`` is tested
    with a ``n_se`` standard-error band.
    """
    counts = simulate_bd_counts(rates, t0, t1, 1, seed, samples, threads=threads)
    law = kendall_params(rates, t0, t1, panels).law()
    hist = np.bincount(counts, minlength=1)
    rows = []
    k = 0
    while True:
        prob = law.pmf(k)
        if prob * samples < min_expected and k > 0:
            break
        hits = int(hist[k]) if k < hist.size else 0
        res = proportion_test(f"P(Z={k})", hits, samples, prob, n_se)
        rows.append({"k": k, "estimate": hits / samples, "expected": prob,
                     "z": res.statistic, "pass": res.passed})
        k += 1
    return {"samples": int(samples), "seed": int(seed), "n_se": n_se,
            "rows": rows, "pass": all(r["pass"] for r in rows)}
