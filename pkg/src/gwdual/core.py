"""Reproduction mappings, grids of mappings, and their compositions.

A reproduction mapping is a monotone map ``U`` on ``{0, ..., W}`` with
``U(0) = 0``; its increments ``u(x) = U(x) - U(x-1)`` are the offspring
numbers of the particles of rank ``x``. A grid stacks one mapping per
generation ``t`` in a half-open time window ``[t_start, t_end)``.

Ranks above the tracked width are never guessed: evaluations that would need
them return :data:`TRUNCATED` (scalar API) or ``-1`` (array API).
"""

import json
from dataclasses import dataclass

import numpy as np

DEFAULT_WIDTH = 64
DEFAULT_OFFSPRING_CAP = 2**32 - 1

# array-level marker for "needs a rank outside the tracked window"
TRUNC = -1


class GwdualError(Exception):
    """Base class for all errors raised by this package."""


class InvalidOffspring(GwdualError, ValueError):
    pass


class WindowError(GwdualError, ValueError):
    pass


class RankOverflow(GwdualError, ValueError):
    pass


class OffspringOverflow(GwdualError, OverflowError):
    pass


class _Truncated:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "TRUNCATED"

    def __reduce__(self):
        return (_Truncated, ())


TRUNCATED = _Truncated()
"""Returned when a value depends on ranks beyond the tracked window."""


def is_truncated(value):
    return value is TRUNCATED


class ReproductionMapping:
    """Monotone map ``U`` with ``U(0) = 0`` tracked on ranks ``0..width``.

    Instances are immutable; the underlying arrays are read-only.
    """

    __slots__ = ("_offspring", "_cumulative")

    def __init__(self, offspring, _cumulative=None):
        off = np.array(offspring, dtype=np.int64).reshape(-1)
        if off.size and off.min() < 0:
            bad = int(np.argmax(off < 0)) + 1
            raise InvalidOffspring(f"offspring number at rank {bad} is negative")
        cum = _cumulative
        if cum is None:
            cum = np.zeros(off.size + 1, dtype=np.int64)
            np.cumsum(off, out=cum[1:])
        off.setflags(write=False)
        cum.setflags(write=False)
        self._offspring = off
        self._cumulative = cum

    @property
    def offspring(self):
        """Offspring numbers ``u(1..W)`` (index 0 is rank 1)."""
        return self._offspring

    @property
    def cumulative(self):
        """Values ``U(0..W)``."""
        return self._cumulative

    @property
    def width(self):
        return int(self._offspring.size)

    @property
    def top(self):
        """``U(width)``, the number of children of the tracked ranks."""
        return int(self._cumulative[-1])

    def __call__(self, x):
        x = int(x)
        if x < 0:
            raise ValueError(f"ranks are non-negative, got {x}")
        if x > self.width:
            return TRUNCATED
        return int(self._cumulative[x])

    def apply(self, xs):
        """Vectorised evaluation; entries ``< 0`` or ``> width`` map to ``TRUNC``."""
        xs = np.asarray(xs, dtype=np.int64)
        ok = (xs >= 0) & (xs <= self.width)
        out = np.full(xs.shape, TRUNC, dtype=np.int64)
        out[ok] = self._cumulative[xs[ok]]
        return out

    def parent(self, x):
        """Rank of the parent of child ``x`` (1 <= x <= U(W)).

        This is the unique ``x'`` with ``U(x'-1) < x <= U(x')``.
        """
        x = int(x)
        if not 1 <= x <= self.top:
            return TRUNCATED
        return int(np.searchsorted(self._cumulative, x, side="left"))

    def __eq__(self, other):
        if not isinstance(other, ReproductionMapping):
            return NotImplemented
        return np.array_equal(self._offspring, other._offspring)

    def __hash__(self):
        return hash(self._offspring.tobytes())

    def __repr__(self):
        return f"{type(self).__name__}({self._offspring.tolist()})"


def make_mapping(offspring, cap=DEFAULT_OFFSPRING_CAP):
    """Build the cumulative mapping from offspring numbers ``u(1..W)``.

    >>> make_mapping([2, 0, 1]).cumulative.tolist()
    [0, 2, 2, 3]
    """
    mapping = ReproductionMapping(offspring)
    if mapping.width and mapping.offspring.max() > cap:
        raise OffspringOverflow(
            f"offspring number {int(mapping.offspring.max())} exceeds cap {cap}"
        )
    return mapping


def identity_mapping(width):
    return ReproductionMapping(np.ones(width, dtype=np.int64))


def _compose_values(rows, xs):
    """Push rank array ``xs`` through ``rows`` in order, marking truncation.

    The final application may produce values above the last row's width:
    those are exact and kept. Only inputs outside a row's domain truncate.
    """
    vals = np.array(xs, dtype=np.int64)
    for row in rows:
        ok = vals != TRUNC
        vals = np.where(ok, row.apply(np.where(ok, vals, 0)), TRUNC)
        vals[~ok] = TRUNC
    return vals


class MappingSystem:
    """Sequence of mappings indexed by consecutive generations ``[t_start, t_end)``.

    ``width`` is the rank window used for display and for the sweep over
    starting ranks; individual rows may track more or fewer ranks.
    """

    def __init__(self, t_start, rows, width):
        self.t_start = int(t_start)
        self.rows = tuple(rows)
        self.t_end = self.t_start + len(self.rows)
        self.width = int(width)

    def __len__(self):
        return len(self.rows)

    def covers(self, a, b):
        return self.t_start <= a <= b <= self.t_end

    def row(self, t):
        if not self.t_start <= t < self.t_end:
            raise WindowError(
                f"generation {t} outside window [{self.t_start}, {self.t_end})"
            )
        return self.rows[t - self.t_start]

    def _check_window(self, a, b):
        if a > b:
            raise WindowError(f"empty composition window: a={a} > b={b}")
        if not self.covers(a, b):
            raise WindowError(
                f"window [{a}, {b}) not covered by [{self.t_start}, {self.t_end})"
            )

    def compose(self, a, b, x):
        """``U_{b-1} o ... o U_a (x)``; ``U_{a,a}(x) = x``."""
        self._check_window(a, b)
        x = int(x)
        if x < 0:
            raise ValueError(f"ranks are non-negative, got {x}")
        rows = self.rows[a - self.t_start : b - self.t_start]
        if rows and x > rows[0].width:
            return TRUNCATED
        val = int(_compose_values(rows, [x])[0])
        return TRUNCATED if val == TRUNC else val

    def compose_array(self, a, b, xs=None):
        """Vectorised :meth:`compose`; truncated entries are ``TRUNC``.

        ``xs`` defaults to ``0..width``.
        """
        self._check_window(a, b)
        if xs is None:
            xs = np.arange(self.width + 1)
        rows = self.rows[a - self.t_start : b - self.t_start]
        return _compose_values(rows, xs)


class ReproductionGrid(MappingSystem):
    """Sampled reproduction mappings ``U_t``, ``t_start <= t < t_end``, of equal width."""

    def __init__(self, t_start, rows, seed=0, law=None):
        rows = tuple(rows)
        if not rows:
            raise WindowError("a grid needs at least one generation (t_start < t_end)")
        width = rows[0].width
        if width < 1:
            raise ValueError("grid width must be positive")
        if any(r.width != width for r in rows):
            raise ValueError("all grid rows must share the same width")
        super().__init__(t_start, rows, width)
        self.seed = int(seed)
        if isinstance(law, dict):
            from .laws import law_from_config

            law = law_from_config(law)
        self.law = law

    @classmethod
    def from_offspring(cls, offspring, t_start=0, seed=0, law=None,
                       cap=DEFAULT_OFFSPRING_CAP):
        matrix = np.asarray(offspring, dtype=np.int64)
        if matrix.ndim != 2:
            raise ValueError("offspring matrix must be 2-D (generations x ranks)")
        return cls(t_start, [make_mapping(r, cap) for r in matrix], seed, law)

    @classmethod
    def identity(cls, t_start, t_end, width, seed=0):
        return cls.from_offspring(np.ones((t_end - t_start, width)), t_start, seed)

    @property
    def offspring_matrix(self):
        return np.stack([r.offspring for r in self.rows])

    def __eq__(self, other):
        if not isinstance(other, ReproductionGrid):
            return NotImplemented
        return (self.t_start == other.t_start
                and self.seed == other.seed
                and np.array_equal(self.offspring_matrix, other.offspring_matrix))

    def to_dict(self):
        law = self.law
        if law is not None and hasattr(law, "to_config"):
            law = law.to_config()
        return {
            "t_start": self.t_start,
            "t_end": self.t_end,
            "width": self.width,
            "seed": self.seed,
            "law": law,
            "rows": self.offspring_matrix.tolist(),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, doc):
        try:
            t_start, t_end = int(doc["t_start"]), int(doc["t_end"])
            width = int(doc["width"])
            rows = doc["rows"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed grid document: {exc}") from None
        if len(rows) != t_end - t_start:
            raise ValueError(
                f"grid has {len(rows)} rows but window [{t_start}, {t_end})"
            )
        if any(len(r) != width for r in rows):
            raise ValueError(f"every row must list exactly {width} offspring numbers")
        return cls.from_offspring(np.array(rows, dtype=np.int64).reshape(len(rows), width),
                                  t_start, doc.get("seed", 0), doc.get("law"))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def compose(grid, a, b, x):
    """Value of the stochastic iteration ``U_{a,b}(x)`` (or ``TRUNCATED``)."""
    return grid.compose(a, b, x)


@dataclass(frozen=True)
class Trajectory:
    start_time: int
    start_state: int
    states: tuple
    truncated: bool

    @property
    def times(self):
        return tuple(range(self.start_time, self.start_time + len(self.states)))


def simulate_trajectory(grid, a, z, horizon):
    """Population sizes ``Z_a = z, Z_{t+1} = U_t(Z_t)`` for ``a <= t <= horizon``.

    If some ``Z_t`` exceeds the grid width the trajectory stops at the
    last state inside the window and is flagged truncated.
    """
    z = int(z)
    if not 0 <= z <= grid.width:
        raise RankOverflow(f"start state {z} outside ranks 0..{grid.width}")
    if not grid.t_start <= a <= horizon <= grid.t_end:
        raise WindowError(
            f"need t_start <= a <= horizon <= t_end, got a={a}, horizon={horizon}"
        )
    states = [z]
    truncated = False
    for t in range(a, horizon):
        nxt = grid.row(t)(states[-1])
        if nxt is TRUNCATED or nxt > grid.width:
            truncated = True
            break
        states.append(nxt)
    return Trajectory(a, z, tuple(states), truncated)


def parent_map_is_valid(mapping):
    """Exhaustive check of the rank-inheritance rules on one row.

    Every child ``1..U(W)`` has exactly one parent ``x'`` with
    ``U(x'-1) < x <= U(x')`` and the parent map is non-decreasing.
    """
    cum = mapping.cumulative
    last = 0
    for child in range(1, mapping.top + 1):
        parents = [y for y in range(1, mapping.width + 1) if cum[y - 1] < child <= cum[y]]
        if len(parents) != 1 or parents[0] < last:
            return False
        last = parents[0]
    return True
