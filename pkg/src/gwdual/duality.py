"""Pathwise Siegmund duals of reproduction mappings and grids.

The dual of a mapping ``U`` is ``V(x) = min{y : U(y) >= x}``. On a finite
rank window ``0..W`` it is known exactly for ``x <= U(W)``; beyond that the
minimum would need ranks the grid does not track, so ``DualMapping`` objects
carry ``valid_to = U(W)`` as their width.

Time conventions for a primary grid on ``[a, b)``:

* ``V_t = U_t^-`` (the time-reverse system, ``V_{b,a} = V_a o ... o V_{b-1}``)
* ``hatU_t = V_{-t-1}``, so the dual grid lives on ``[-b, -a)``
* the dual of the dual grid is back on ``[a, b)`` and equals ``U`` shifted
  by one rank: ``tildeU_{a,b}(x) = U_{a,b}(x-1) + 1``.
"""

from dataclasses import dataclass, field

import numpy as np

from .core import (
    TRUNC,
    TRUNCATED,
    MappingSystem,
    ReproductionMapping,
    WindowError,
)


class DualMapping(ReproductionMapping):
    """Dual ``V`` of a mapping, materialised on ``0..valid_to``."""

    __slots__ = ()

    @property
    def valid_to(self):
        return self.width


def dual_values(cumulative, xs):
    """``min{y : U(y) >= x}`` for each ``x`` in ``xs`` (searchsorted form)."""
    return np.searchsorted(cumulative, np.asarray(xs, dtype=np.int64), side="left")


def dual_mapping(mapping):
    """Pathwise dual ``U^-`` on its exact domain ``0..U(W)``.

    >>> dual_mapping(make_mapping([2, 0, 1])).offspring.tolist()
    [1, 0, 2]
    """
    cum = mapping.cumulative
    top = int(cum[-1])
    vcum = dual_values(cum, np.arange(top + 1)).astype(np.int64)
    dual = DualMapping(np.diff(vcum), _cumulative=vcum)
    # rank 1 of a dual is eternal
    assert top == 0 or dual.offspring[0] >= 1
    return dual


def is_potentially_defective(mapping, slack=1.0):
    """Flag rows whose dual saturates inside the window.

    The dual stays constant from the last reproducing rank ``y* = V(U(W))``
    upwards; such a plateau is the finite-window trace of an infinite
    offspring number. The row is flagged when ``y* < W`` and the plateau
    (``u(y*) - 1`` dual ranks) is at least ``slack * W`` long.
    """
    if mapping.top == 0:
        return False
    last = int(np.flatnonzero(mapping.offspring)[-1]) + 1
    return last < mapping.width and mapping.offspring[last - 1] - 1 >= slack * mapping.width


class DualGrid(MappingSystem):
    """Rows of dual mappings on a (time-reflected) window.

    ``source_window`` is the window of the system that was dualised.
    """

    def __init__(self, t_start, rows, width, source_window, seed=0, law=None):
        super().__init__(t_start, rows, width)
        self.source_window = tuple(source_window)
        self.seed = seed
        self.law = law

    def to_dict(self):
        law = self.law
        if law is not None and hasattr(law, "to_config"):
            law = law.to_config()
        return {
            "kind": "dual",
            "t_start": self.t_start,
            "t_end": self.t_end,
            "width": self.width,
            "seed": self.seed,
            "law": law,
            "source_window": list(self.source_window),
            "rows": [r.offspring.tolist() for r in self.rows],
        }


def dual_grid(system, a=None, b=None):
    """Dual system ``hatU_t = V_{-t-1}`` on the dual window ``[a, b)``.

    The default window is the full reflection ``[-t_end, -t_start)``.
    Works on primary grids and on dual grids alike.
    """
    full = (-system.t_end, -system.t_start)
    a = full[0] if a is None else a
    b = full[1] if b is None else b
    if not (full[0] <= a < b <= full[1]):
        raise WindowError(
            f"dual window [{a}, {b}) not inside the reflected window [{full[0]}, {full[1]})"
        )
    rows = [dual_mapping(system.row(-t - 1)) for t in range(a, b)]
    return DualGrid(a, rows, system.width, (system.t_start, system.t_end),
                    getattr(system, "seed", 0), getattr(system, "law", None))


class TimeReverse:
    """The system ``V_{b,a} = V_a o ... o V_{b-1}`` of dual rows in primary time."""

    def __init__(self, system):
        self.system = system
        self.t_start = system.t_start
        self.t_end = system.t_end
        self._rows = [dual_mapping(r) for r in system.rows]

    def row(self, t):
        if not self.t_start <= t < self.t_end:
            raise WindowError(f"generation {t} outside [{self.t_start}, {self.t_end})")
        return self._rows[t - self.t_start]

    def compose(self, b, a, x):
        if not self.t_start <= a <= b <= self.t_end:
            raise WindowError(f"window [{a}, {b}) not covered")
        val = x
        for t in range(b - 1, a - 1, -1):
            val = self._rows[t - self.t_start](val)
            if val is TRUNCATED:
                return TRUNCATED
        return val


# ---------------------------------------------------------------------------
# verification


@dataclass
class DualityReport:
    """Exhaustive check over a rank rectangle for one or more windows."""

    name: str
    checked: int = 0
    truncated_skipped: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.violations

    def merge(self, other):
        self.checked += other.checked
        self.truncated_skipped += other.truncated_skipped
        self.violations.extend(other.violations)
        return self

    def to_dict(self, max_violations=100):
        return {
            "check": self.name,
            "checked": self.checked,
            "violations": self.violations[:max_violations],
            "truncated_skipped": self.truncated_skipped,
            "pass": self.passed,
        }


def siegmund_indicators(grid, a, b, dual=None):
    """Both sides of ``{hatU_{-b,-a}(x) <= y} = {x <= U_{a,b}(y)}`` on ``0..W``.

    Returns ``(lhs, rhs, valid)`` boolean matrices indexed ``[x, y]``.
    """
    if not grid.covers(a, b):
        raise WindowError(f"window [{a}, {b}) not covered by the grid")
    if dual is None:
        dual = dual_grid(grid)
    ranks = np.arange(grid.width + 1)
    dual_vals = dual.compose_array(-b, -a, ranks)
    prim_vals = grid.compose_array(a, b, ranks)
    lhs = dual_vals[:, None] <= ranks[None, :]
    rhs = ranks[:, None] <= prim_vals[None, :]
    valid = (dual_vals != TRUNC)[:, None] & (prim_vals != TRUNC)[None, :]
    return lhs, rhs, valid


def verify_siegmund(grid, a, b, dual=None):
    """Check the event identity of the pathwise duality on the valid rectangle."""
    lhs, rhs, valid = siegmund_indicators(grid, a, b, dual)
    report = DualityReport("siegmund")
    report.checked = int(valid.sum())
    report.truncated_skipped = int(valid.size - report.checked)
    for x, y in np.argwhere(valid & (lhs != rhs)):
        report.violations.append({"x": int(x), "y": int(y), "a": a, "b": b,
                                  "lhs": bool(lhs[x, y]), "rhs": bool(rhs[x, y])})
    return report


def twofold_dual(grid):
    """The dual of the dual grid, back on the primary window."""
    return dual_grid(dual_grid(grid))


def verify_twofold_shift(grid, a, b, twofold=None):
    """Check ``tildeU_{a,b}(x) = U_{a,b}(x-1) + 1`` for ranks ``1..W``."""
    if not grid.covers(a, b):
        raise WindowError(f"window [{a}, {b}) not covered by the grid")
    if twofold is None:
        twofold = twofold_dual(grid)
    ranks = np.arange(1, grid.width + 1)
    lhs = twofold.compose_array(a, b, ranks)
    base = grid.compose_array(a, b, ranks - 1)
    rhs = np.where(base != TRUNC, base + 1, TRUNC)
    valid = (lhs != TRUNC) & (rhs != TRUNC)
    report = DualityReport("twofold_shift")
    report.checked = int(valid.sum())
    report.truncated_skipped = int(valid.size - report.checked)
    for i in np.flatnonzero(valid & (lhs != rhs)):
        report.violations.append({"x": int(ranks[i]), "y": int(ranks[i] - 1), "a": a, "b": b,
                                  "lhs": int(lhs[i]), "rhs": int(rhs[i])})
    return report


def verify_step_duality(mapping):
    """Per-row identity ``V(x) <= z iff x <= U(z)`` on the valid rectangle."""
    dual = dual_mapping(mapping)
    xs = np.arange(dual.valid_to + 1)
    zs = np.arange(mapping.width + 1)
    lhs = dual.cumulative[xs][:, None] <= zs[None, :]
    rhs = xs[:, None] <= mapping.cumulative[zs][None, :]
    return bool(np.array_equal(lhs, rhs))


def verify_all_windows(grid, max_length=None):
    """Siegmund and twofold-shift checks over every sub-window ``a <= b``."""
    dual = dual_grid(grid)
    twofold = dual_grid(dual)
    siegmund = DualityReport("siegmund")
    shift = DualityReport("twofold_shift")
    for a in range(grid.t_start, grid.t_end + 1):
        for b in range(a, grid.t_end + 1):
            if max_length is not None and b - a > max_length:
                break
            siegmund.merge(verify_siegmund(grid, a, b, dual))
            shift.merge(verify_twofold_shift(grid, a, b, twofold))
    return siegmund, shift


# ---------------------------------------------------------------------------
# block decomposition


@dataclass(frozen=True)
class BlockDecomposition:
    """Offspring sequence as ``(0^xi_1, eta_1 + 1, 0^xi_2, eta_2 + 1, ...)``.

    ``xi`` and ``eta`` list the complete blocks; ``trailing_zeros`` counts
    zeros after the last reproducing rank (a block cut by the window).
    """

    xi: tuple
    eta: tuple
    trailing_zeros: int = 0

    @property
    def complete(self):
        return self.trailing_zeros == 0

    def primary_offspring(self):
        out = []
        for xi, eta in zip(self.xi, self.eta):
            out.extend([0] * xi + [eta + 1])
        return out + [0] * self.trailing_zeros


def block_decompose(mapping):
    xi, eta = [], []
    zeros = 0
    for u in mapping.offspring.tolist():
        if u == 0:
            zeros += 1
        else:
            xi.append(zeros)
            eta.append(u - 1)
            zeros = 0
    return BlockDecomposition(tuple(xi), tuple(eta), zeros)


def block_assemble_dual(blocks):
    """Dual offspring ``(xi_1 + 1, 0^eta_1, xi_2 + 1, 0^eta_2, ...)``.

    Trailing zeros do not move ``U(W)``, so the result is the full dual on
    ``0..U(W)`` even for an incomplete final block.
    """
    out = []
    for xi, eta in zip(blocks.xi, blocks.eta):
        out.extend([xi + 1] + [0] * eta)
    off = np.array(out, dtype=np.int64)
    return DualMapping(off)


def block_assemble_twofold(blocks):
    """Twofold-dual offspring ``(1, 0^xi_1, eta_1 + 1, 0^xi_2, eta_2 + 1, ...)``."""
    out = [1]
    for xi, eta in zip(blocks.xi, blocks.eta):
        out.extend([0] * xi + [eta + 1])
    return ReproductionMapping(np.array(out, dtype=np.int64))
