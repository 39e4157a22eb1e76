"""Offspring laws ``f_{t,x}`` and exact inversion samplers.

A law spec maps every particle label ``(t, x)`` to an offspring
distribution (a "cell"). Cells know their pgf, pmf and mean and turn a pair
of uniforms into a draw by inversion, so that sampling a grid is a pure
function of ``(seed, law, window, width)``.

Law configs are JSON documents ``{"family": ..., "params": {...}}``; see
``law_from_config`` for the per-family parameter names.
"""

import math
from abc import ABC, abstractmethod

import numpy as np
from scipy import stats

from . import rng
from .core import (
    DEFAULT_OFFSPRING_CAP,
    GwdualError,
    OffspringOverflow,
    ReproductionGrid,
    ReproductionMapping,
)

PROB_TOL = 1e-12


class LawError(GwdualError, ValueError):
    pass


class DomainError(GwdualError, ValueError):
    pass


class NotRankIndependent(GwdualError, ValueError):
    pass


def _check_s(s):
    arr = np.asarray(s, dtype=float)
    if np.any((arr < -PROB_TOL) | (arr > 1 + PROB_TOL)) or np.any(np.isnan(arr)):
        raise DomainError(f"pgf argument must lie in [0, 1], got {s}")
    # composed pgfs can land a rounding error outside the interval
    return np.clip(arr, 0.0, 1.0)


def _prob(value, name, lo_open=False):
    value = float(value)
    ok = (0 < value <= 1) if lo_open else (0 <= value <= 1)
    if not ok:
        interval = "(0, 1]" if lo_open else "[0, 1]"
        raise LawError(f"{name} must lie in {interval}, got {value}")
    return value


# ---------------------------------------------------------------------------
# cells


class OffspringDistribution(ABC):
    """Distribution of a single offspring number ``u_t(x)``."""

    @abstractmethod
    def pgf(self, s):
        ...

    @abstractmethod
    def pmf(self, k):
        ...

    @property
    @abstractmethod
    def mean(self):
        ...

    @abstractmethod
    def invert(self, u0, u1):
        """Map two independent U[0,1) arrays to draws (int64 array)."""

    def to_table(self):
        """Exact table-with-geometric-tail form, when one exists."""
        raise LawError(f"{type(self).__name__} has no table representation")


class GwLawTable(OffspringDistribution):
    """Table ``P_0..P_K`` with an optional geometric tail.

    With ``tail_ratio = r`` the tail continues as ``P_{K+j} = P_K r**j`` for
    ``j >= 1``, so the table mass plus ``P_K r / (1 - r)`` must equal one.
    """

    def __init__(self, probs, tail_ratio=None):
        probs = np.array(probs, dtype=float).reshape(-1)
        if probs.size == 0 or np.any(probs < 0) or np.any(np.isnan(probs)):
            raise LawError("probability table must be non-empty and non-negative")
        if tail_ratio is not None:
            tail_ratio = float(tail_ratio)
            if not 0 < tail_ratio < 1:
                raise LawError(f"tail_ratio must lie in (0, 1), got {tail_ratio}")
            if probs[-1] == 0:
                raise LawError("a geometric tail needs P_K > 0")
            tail_mass = probs[-1] * tail_ratio / (1 - tail_ratio)
        else:
            tail_mass = 0.0
        total = probs.sum() + tail_mass
        if abs(total - 1) > PROB_TOL:
            raise LawError(f"probabilities sum to {float(total)!r}, not 1")
        probs.setflags(write=False)
        self.probs = probs
        self.tail_ratio = tail_ratio
        self.tail_mass = tail_mass
        self._cdf = np.cumsum(probs)
        self._support_max = int(np.flatnonzero(probs)[-1])

    @property
    def K(self):
        return self.probs.size - 1

    @property
    def p0(self):
        return float(self.probs[0])

    @property
    def finite(self):
        return self.tail_ratio is None

    def pmf(self, k):
        k = np.asarray(k, dtype=np.int64)
        out = np.zeros(k.shape, dtype=float)
        inside = (k >= 0) & (k <= self.K)
        out[inside] = self.probs[k[inside]]
        if self.tail_ratio is not None:
            beyond = k > self.K
            out[beyond] = self.probs[-1] * self.tail_ratio ** (k[beyond] - self.K)
        return out if out.ndim else float(out)

    def sf(self, k):
        """``P(u >= k)``."""
        k = int(k)
        if k <= 0:
            return 1.0
        if k > self.K:
            if self.tail_ratio is None:
                return 0.0
            r = self.tail_ratio
            return float(self.probs[-1] * r ** (k - self.K) / (1 - r))
        return float(self.probs[k:].sum() + self.tail_mass)

    def pgf(self, s):
        s = _check_s(s)
        val = np.polynomial.polynomial.polyval(s, self.probs)
        if self.tail_ratio is not None:
            r = self.tail_ratio
            val = val + self.probs[-1] * s**self.K * r * s / (1 - r * s)
        return val if np.ndim(val) else float(val)

    @property
    def mean(self):
        m = float(np.dot(np.arange(self.K + 1), self.probs))
        if self.tail_ratio is not None:
            r = self.tail_ratio
            # sum_j (K + j) P_K r^j
            m += self.probs[-1] * (self.K * r / (1 - r) + r / (1 - r) ** 2)
        return m

    def invert(self, u0, u1):
        u0 = np.asarray(u0, dtype=float)
        k = np.searchsorted(self._cdf, u0, side="right")
        if self.tail_ratio is None:
            # float round-off can leave cdf[-1] a hair below 1
            return np.minimum(k, self._support_max).astype(np.int64)
        in_tail = k > self.K
        k = k.astype(np.int64)
        if np.any(in_tail):
            resid = (u0[in_tail] - self._cdf[-1]) / self.tail_mass
            resid = np.clip(resid, 0.0, np.nextafter(1.0, 0.0))
            j = 1 + np.floor(np.log1p(-resid) / math.log(self.tail_ratio))
            k[in_tail] = self.K + j.astype(np.int64)
        return k

    def to_table(self):
        return self

    def to_config(self):
        return {"probs": self.probs.tolist(), "tail_ratio": self.tail_ratio}

    def __eq__(self, other):
        return (isinstance(other, GwLawTable)
                and np.array_equal(self.probs, other.probs)
                and self.tail_ratio == other.tail_ratio)

    def __hash__(self):
        return hash((self.probs.tobytes(), self.tail_ratio))

    def __repr__(self):
        tail = f", tail_ratio={self.tail_ratio}" if self.tail_ratio is not None else ""
        return f"GwLawTable({self.probs.tolist()}{tail})"


class LinearFractionalParams(OffspringDistribution):
    """Linear-fractional law with pgf ``1 - q + q p s / (1 - (1 - p) s)``.

    ``q`` is the probability of a non-zero offspring number; given that,
    the number is geometric on ``{1, 2, ...}`` with success probability ``p``.
    """

    def __init__(self, p, q):
        self.p = _prob(p, "p", lo_open=True)
        self.q = _prob(q, "q", lo_open=True)

    def pgf(self, s):
        s = _check_s(s)
        p, q = self.p, self.q
        val = 1 - q + q * p * s / (1 - (1 - p) * s)
        return val if np.ndim(val) else float(val)

    def pmf(self, k):
        k = np.asarray(k, dtype=np.int64)
        pos = self.q * self.p * (1 - self.p) ** np.maximum(k - 1, 0)
        out = np.where(k == 0, 1 - self.q, np.where(k > 0, pos, 0.0))
        return out if out.ndim else float(out)

    @property
    def mean(self):
        return self.q / self.p

    def invert(self, u0, u1):
        u0 = np.asarray(u0, dtype=float)
        u1 = np.asarray(u1, dtype=float)
        alive = u0 < self.q
        if self.p == 1:
            geo = np.ones(u1.shape)
        else:
            geo = 1 + np.floor(np.log1p(-u1) / math.log1p(-self.p))
        return np.where(alive, geo, 0).astype(np.int64)

    def to_table(self):
        if self.p == 1:
            return GwLawTable([1 - self.q, self.q])
        return GwLawTable([1 - self.q, self.q * self.p], tail_ratio=1 - self.p)

    def __eq__(self, other):
        return (isinstance(other, LinearFractionalParams)
                and (self.p, self.q) == (other.p, other.q))

    def __hash__(self):
        return hash(("lf", self.p, self.q))

    def __repr__(self):
        return f"LinearFractionalParams(p={self.p}, q={self.q})"


class PoissonLaw(OffspringDistribution):
    def __init__(self, mean):
        mean = float(mean)
        if not mean >= 0:
            raise LawError(f"Poisson mean must be non-negative, got {mean}")
        self._mean = mean

    @property
    def mean(self):
        return self._mean

    def pgf(self, s):
        s = _check_s(s)
        val = np.exp(self._mean * (s - 1))
        return val if np.ndim(val) else float(val)

    def pmf(self, k):
        return stats.poisson.pmf(k, self._mean)

    def invert(self, u0, u1):
        if self._mean == 0:
            return np.zeros(np.shape(u0), dtype=np.int64)
        k = stats.poisson.ppf(u0, self._mean)
        # ppf(0) is -1 by scipy convention
        return np.maximum(k, 0).astype(np.int64)

    def __eq__(self, other):
        return isinstance(other, PoissonLaw) and self._mean == other._mean

    def __hash__(self):
        return hash(("poisson", self._mean))

    def __repr__(self):
        return f"PoissonLaw({self._mean})"


class ShiftedLaw(OffspringDistribution):
    """``1 + G`` for a base law ``G``: pgf ``s g(s)``."""

    def __init__(self, base):
        self.base = base

    def pgf(self, s):
        s = _check_s(s)
        val = s * self.base.pgf(s)
        return val if np.ndim(val) else float(val)

    def pmf(self, k):
        k = np.asarray(k, dtype=np.int64)
        out = np.where(k >= 1, self.base.pmf(np.maximum(k - 1, 0)), 0.0)
        return out if out.ndim else float(out)

    @property
    def mean(self):
        return 1 + self.base.mean

    def invert(self, u0, u1):
        return 1 + self.base.invert(u0, u1)

    def __eq__(self, other):
        return isinstance(other, ShiftedLaw) and self.base == other.base

    def __hash__(self):
        return hash(("shift", self.base))

    def __repr__(self):
        return f"ShiftedLaw({self.base!r})"


DEATH = GwLawTable([1.0])


# ---------------------------------------------------------------------------
# schedules over time / rank


class _Schedule:
    """Scalar, or a list indexed from ``origin``."""

    def __init__(self, value, name, origin=0, extend=False, check=None):
        self.name = name
        self.origin = int(origin)
        self.extend = extend
        if isinstance(value, (list, tuple, np.ndarray)):
            vals = [check(v) if check else v for v in value]
            if not vals:
                raise LawError(f"{name} schedule is empty")
            self.values = tuple(vals)
            self.scalar = None
        else:
            self.scalar = check(value) if check else value
            self.values = None

    @property
    def constant(self):
        return self.scalar is not None or len(set(self.values)) == 1

    def __call__(self, i):
        if self.scalar is not None:
            return self.scalar
        j = i - self.origin
        if j < 0 or (j >= len(self.values) and not self.extend):
            raise LawError(
                f"{self.name} schedule covers {self.origin}.."
                f"{self.origin + len(self.values) - 1}, asked for {i}"
            )
        return self.values[min(j, len(self.values) - 1)]

    def to_config(self):
        return self.scalar if self.scalar is not None else list(self.values)


def _table_from(cfg, name):
    if isinstance(cfg, GwLawTable):
        return cfg
    if isinstance(cfg, LinearFractionalParams):
        return cfg.to_table()
    if isinstance(cfg, dict):
        if "probs" in cfg:
            return GwLawTable(cfg["probs"], cfg.get("tail_ratio"))
        if "p" in cfg and "q" in cfg:
            return LinearFractionalParams(cfg["p"], cfg["q"]).to_table()
    if isinstance(cfg, (list, tuple)):
        return GwLawTable(cfg)
    raise LawError(f"cannot read {name} as a probability table: {cfg!r}")


# ---------------------------------------------------------------------------
# law specs


class OffspringLawSpec(ABC):
    """Declarative description of the reproduction law ``f_{t,x}``."""

    family = None
    time_homogeneous = True

    @abstractmethod
    def cell(self, t, x):
        """Offspring distribution of the particle ``(x, t)``."""

    @abstractmethod
    def params(self):
        ...

    def rank_independent_at(self, t):
        return False

    def row_cells(self, t, width):
        return [self.cell(t, x) for x in range(1, width + 1)]

    def to_config(self):
        return {"family": self.family, "params": self.params()}

    def __eq__(self, other):
        return isinstance(other, OffspringLawSpec) and self.to_config() == other.to_config()

    def __hash__(self):
        return hash(repr(self.to_config()))

    def __repr__(self):
        return f"{type(self).__name__}({self.params()})"


class IidGwLaw(OffspringLawSpec):
    """Classical GW reproduction: one table for every particle."""

    family = "iid_gw"

    def __init__(self, table):
        self.table = _table_from(table, "iid_gw table")

    def cell(self, t, x):
        return self.table

    def rank_independent_at(self, t):
        return True

    def params(self):
        return self.table.to_config()


class LinearFractionalLaw(OffspringLawSpec):
    """LF law with per-generation ``(p_t, q_t)``; rank independent."""

    family = "linear_fractional"

    def __init__(self, p, q, t_origin=0):
        self._p = _Schedule(p, "p", t_origin, check=lambda v: _prob(v, "p", True))
        self._q = _Schedule(q, "q", t_origin, check=lambda v: _prob(v, "q", True))
        self.t_origin = int(t_origin)
        self.time_homogeneous = self._p.constant and self._q.constant

    def cell(self, t, x):
        return LinearFractionalParams(self._p(t), self._q(t))

    def rank_independent_at(self, t):
        return True

    def params(self):
        return {"p": self._p.to_config(), "q": self._q.to_config(),
                "t_origin": self.t_origin}


class ParityLfLaw(OffspringLawSpec):
    """Odd ranks reproduce geometrically on ``{1, 2, ...}``; even ranks die."""

    family = "parity_lf"

    def __init__(self, p, t_origin=0):
        self._p = _Schedule(p, "p", t_origin, check=lambda v: _prob(v, "p", True))
        self.t_origin = int(t_origin)
        self.time_homogeneous = self._p.constant

    def cell(self, t, x):
        if x % 2 == 0:
            return DEATH
        return LinearFractionalParams(self._p(t), 1.0)

    def params(self):
        return {"p": self._p.to_config(), "t_origin": self.t_origin}


class PureDeathLaw(OffspringLawSpec):
    """Offspring numbers 0 (probability ``p_{t,x}``) or 1.

    Exactly one of ``p`` (constant), ``p_rank`` (list over ranks, last
    value repeated) or ``p_table`` (rows over generations from ``t_origin``,
    columns over ranks) is given.
    """

    family = "pure_death"

    def __init__(self, p=None, p_rank=None, p_table=None, t_origin=0):
        given = [v is not None for v in (p, p_rank, p_table)]
        if sum(given) != 1:
            raise LawError("pure_death needs exactly one of p, p_rank, p_table")
        self.t_origin = int(t_origin)
        self._p = None if p is None else _prob(p, "p")
        self._rank = None if p_rank is None else _Schedule(
            list(p_rank), "p_rank", 1, extend=True, check=lambda v: _prob(v, "p"))
        self._table = None
        if p_table is not None:
            self._table = [
                _Schedule(list(row), "p_table row", 1, extend=True,
                          check=lambda v: _prob(v, "p"))
                for row in p_table
            ]
            if not self._table:
                raise LawError("p_table is empty")
        self.time_homogeneous = self._table is None or len(self._table) == 1

    def death_prob(self, t, x):
        if self._p is not None:
            return self._p
        if self._rank is not None:
            return self._rank(x)
        j = t - self.t_origin
        if not 0 <= j < len(self._table):
            raise LawError(f"p_table has no row for generation {t}")
        return self._table[j](x)

    def cell(self, t, x):
        p = self.death_prob(t, x)
        return GwLawTable([p, 1 - p])

    def rank_independent_at(self, t):
        return self._p is not None

    def params(self):
        if self._p is not None:
            return {"p": self._p}
        if self._rank is not None:
            return {"p_rank": self._rank.to_config()}
        return {"p_table": [r.to_config() for r in self._table],
                "t_origin": self.t_origin}


class BoundedGwLaw(OffspringLawSpec):
    """``f`` for ranks ``x <= B_t``, certain death above the bound."""

    family = "bounded_gw"

    def __init__(self, table, bounds, t_origin=0):
        self.table = _table_from(table, "bounded_gw table")

        def check(v):
            if int(v) != v or v < 0:
                raise LawError(f"bounds must be non-negative integers, got {v}")
            return int(v)

        self._bounds = _Schedule(bounds, "bounds", t_origin, check=check)
        self.t_origin = int(t_origin)
        self.time_homogeneous = self._bounds.constant

    def bound(self, t):
        return self._bounds(t)

    def cell(self, t, x):
        return self.table if x <= self._bounds(t) else DEATH

    def params(self):
        return {**self.table.to_config(), "bounds": self._bounds.to_config(),
                "t_origin": self.t_origin}


class EternalParticleLaw(OffspringLawSpec):
    """Rank 1 has ``1 + G`` offspring (G ~ ``immigration``); other ranks ``base``.

    With the eternal particle removed, its extra offspring act as
    immigrants. The same family with an arbitrary ``u(1) >= 1`` covers the
    emigration construction (``G = u(1) - 1``).
    """

    family = "eternal_particle"

    def __init__(self, immigration, base):
        self.immigration = _table_from(immigration, "immigration table")
        self.base = _table_from(base, "base table")
        self._rank1 = ShiftedLaw(self.immigration)

    def cell(self, t, x):
        return self._rank1 if x == 1 else self.base

    def params(self):
        return {"immigration": self.immigration.to_config(),
                "base": self.base.to_config()}


class CarryingCapacityLaw(OffspringLawSpec):
    """Rank-dependent means ``m_x`` with a carrying capacity ``K``.

    The schedule must satisfy ``m_1 + ... + m_x >= x`` exactly for
    ``x <= K``; the last listed mean is repeated and must be ``<= 1``
    so the inequalities stay reversed beyond the list.
    """

    family = "carrying_capacity"

    def __init__(self, means, offspring="poisson", lf_p=0.5):
        means = [float(m) for m in means]
        if not means or any(m < 0 for m in means):
            raise LawError("means must be a non-empty list of non-negative numbers")
        if means[0] <= 1:
            raise LawError(f"carrying capacity needs m_1 > 1, got {means[0]}")
        if means[-1] > 1:
            raise LawError("the last mean (repeated beyond the list) must be <= 1")
        csum = np.cumsum(means)
        above = csum >= np.arange(1, len(means) + 1)
        K = int(np.argmin(above)) if not above.all() else len(means)
        if above.all() or above[K:].any():
            raise LawError(
                "partial sums of the means must satisfy sum_{y<=x} m_y >= x "
                "exactly for x <= K and < x beyond"
            )
        self.means = tuple(means)
        self.capacity = K
        if offspring not in ("poisson", "linear_fractional"):
            raise LawError(f"unknown carrying_capacity offspring family {offspring!r}")
        self.offspring = offspring
        self.lf_p = _prob(lf_p, "lf_p", lo_open=True)
        if offspring == "linear_fractional" and max(means) * self.lf_p > 1:
            raise LawError("lf_p * m_x must be <= 1 for a linear-fractional match")
        self._mean = _Schedule(list(means), "means", 1, extend=True)

    def mean_at(self, x):
        return self._mean(x)

    def cell(self, t, x):
        m = self._mean(x)
        if self.offspring == "poisson":
            return PoissonLaw(m)
        if m == 0:
            return DEATH
        return LinearFractionalParams(self.lf_p, m * self.lf_p)

    def params(self):
        return {"means": list(self.means), "offspring": self.offspring,
                "lf_p": self.lf_p}


FAMILIES = {
    cls.family: cls
    for cls in (IidGwLaw, LinearFractionalLaw, ParityLfLaw, PureDeathLaw,
                BoundedGwLaw, EternalParticleLaw, CarryingCapacityLaw)
}


def law_from_config(config):
    """Build a law spec from ``{"family": ..., "params": {...}}``.

    Families and parameters:

    - ``iid_gw``: ``probs``, optional ``tail_ratio``
    - ``linear_fractional``: ``p``, ``q`` (scalars or lists), ``t_origin``
    - ``parity_lf``: ``p`` (scalar or list), ``t_origin``
    - ``pure_death``: one of ``p``, ``p_rank``, ``p_table`` (+ ``t_origin``)
    - ``bounded_gw``: ``probs``, ``tail_ratio``, ``bounds``, ``t_origin``
    - ``eternal_particle``: ``immigration`` and ``base`` tables
    - ``carrying_capacity``: ``means``, ``offspring`` (poisson or
      linear_fractional), ``lf_p``
    - ``identity``: no parameters; shorthand for ``iid_gw`` with ``P_1 = 1``
    """
    if isinstance(config, OffspringLawSpec):
        return config
    try:
        family = config["family"]
        params = dict(config.get("params", {}))
    except (TypeError, KeyError, AttributeError):
        raise LawError(f"law config needs 'family' and 'params': {config!r}") from None
    if family == "identity":
        # every particle has exactly one child
        return IidGwLaw([0.0, 1.0])
    if family not in FAMILIES:
        raise LawError(f"unknown law family {family!r}; choose from {sorted(FAMILIES)}")
    try:
        if family == "iid_gw":
            return IidGwLaw(params)
        if family == "bounded_gw":
            bounds = params.pop("bounds")
            origin = params.pop("t_origin", 0)
            return BoundedGwLaw(params, bounds, origin)
        return FAMILIES[family](**params)
    except (TypeError, KeyError) as exc:
        raise LawError(f"bad parameters for {family}: {exc}") from None


# ---------------------------------------------------------------------------
# sampling and pgfs


def _check_cap(values, cap):
    if values.size and values.max() > cap:
        raise OffspringOverflow(f"sampled offspring {int(values.max())} exceeds cap {cap}")


def sample_cells(law, t, x, seed, cap=DEFAULT_OFFSPRING_CAP):
    """Draws ``u_t(x)`` for broadcast arrays of labels ``t``, ``x``."""
    law = law_from_config(law)
    t, x = np.broadcast_arrays(np.asarray(t, dtype=np.int64), np.asarray(x, dtype=np.int64))
    u0, u1 = rng.uniforms(seed, t, x)
    out = np.empty(t.shape, dtype=np.int64)
    groups = {}
    for idx in np.ndindex(t.shape):
        groups.setdefault(law.cell(int(t[idx]), int(x[idx])), []).append(idx)
    for cell, idxs in groups.items():
        sel = tuple(np.array(idxs).T)
        out[sel] = cell.invert(u0[sel], u1[sel])
    _check_cap(out, cap)
    return out


def sample(law, t, x, seed, cap=DEFAULT_OFFSPRING_CAP):
    """A single draw of ``u_t(x)`` from its counter-based stream."""
    return int(sample_cells(law, [t], [x], seed, cap)[0])


def sample_block(law, t_values, width, seed, cap=DEFAULT_OFFSPRING_CAP):
    """Offspring matrix with one row per generation in ``t_values``.

    Rows are grouped by distinct cells, so time-homogeneous laws cost one
    vectorised inversion per distinct rank law.
    """
    law = law_from_config(law)
    t_values = np.asarray(t_values, dtype=np.int64)
    ranks = np.arange(1, width + 1, dtype=np.int64)
    u0, u1 = rng.uniforms(seed, t_values[:, None], ranks[None, :])
    out = np.empty((t_values.size, width), dtype=np.int64)
    if law.time_homogeneous:
        row_sets = [(np.arange(t_values.size), law.row_cells(int(t_values[0]) if t_values.size else 0, width))]
    else:
        row_sets = [(np.array([i]), law.row_cells(int(t), width)) for i, t in enumerate(t_values)]
    for rows, cells in row_sets:
        by_cell = {}
        for col, cell in enumerate(cells):
            by_cell.setdefault(cell, []).append(col)
        for cell, cols in by_cell.items():
            block = np.ix_(rows, cols)
            out[block] = cell.invert(u0[block], u1[block])
    _check_cap(out, cap)
    return out


def sample_grid(law, t_start, t_end, width, seed, cap=DEFAULT_OFFSPRING_CAP):
    """Sample the reproduction grid ``{U_t : t_start <= t < t_end}``."""
    if t_end <= t_start:
        raise ValueError(f"need t_start < t_end, got [{t_start}, {t_end})")
    law = law_from_config(law)
    matrix = sample_block(law, np.arange(t_start, t_end), width, seed, cap)
    rows = [ReproductionMapping(r) for r in matrix]
    return ReproductionGrid(t_start, rows, seed=seed, law=law)


def pgf_eval(law, t, x, s):
    """``f_{t,x}(s) = E s^{u_t(x)}``."""
    _check_s(s)
    return law_from_config(law).cell(t, x).pgf(s)


def ve_pgf_compose(law, a, t, s, z=1):
    """``E(s^{Z_t} | Z_a = z) = (f_a o ... o f_{t-1}(s))**z`` for rank-independent laws."""
    law = law_from_config(law)
    s = _check_s(s)
    if t < a:
        raise ValueError(f"need a <= t, got a={a}, t={t}")
    for g in range(a, t):
        if not law.rank_independent_at(g):
            raise NotRankIndependent(f"law {law.family} depends on rank at generation {g}")
    val = s
    for g in reversed(range(a, t)):
        val = law.cell(g, 1).pgf(val)
    val = np.asarray(val, dtype=float) ** z
    return val if val.ndim else float(val)
