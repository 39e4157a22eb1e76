"""A small grid, its dual and the twofold dual.

Samples a linear fractional grid, prints the rows next to their duals,
and checks the event identity and the twofold shift on every window.

    python demos/01_grid_and_dual.py
"""

import numpy as np

from gwdual import (ReproductionGrid, dual_grid, dual_mapping, make_mapping, sample_grid,
                    twofold_dual, verify_siegmund, verify_twofold_shift)
from gwdual.duality import block_assemble_dual, block_decompose


def show_one_step():
    m = make_mapping([0, 0, 3, 1, 0, 2])
    print("u       =", m.offspring.tolist())
    print("U       =", m.cumulative.tolist())
    d = dual_mapping(m)
    print("dual u  =", d.offspring.tolist(), f"(valid up to rank {d.valid_to})")
    blocks = block_decompose(m)
    print("blocks  xi =", blocks.xi, " eta =", blocks.eta)
    print("assembled from blocks:", block_assemble_dual(blocks).offspring.tolist())


def show_grid():
    law = {"family": "linear_fractional", "params": {"p": 0.6, "q": 0.8}}
    grid = sample_grid(law, 0, 4, width=10, seed=7)
    dual = dual_grid(grid)
    print("\nprimary rows t = 0..3 (ranks 1..10):")
    for t in range(grid.t_start, grid.t_end):
        print(f"  U_{t}: u =", grid.row(t).offspring.tolist())
    print("dual rows, time reversed:")
    for t in range(dual.t_start, dual.t_end):
        print(f"  hatU_{t}: v =", dual.row(t).offspring.tolist())

    # two-generation composition and its dual
    ys = np.arange(grid.width + 1)
    print("\nU_{0,2}(y)      =", grid.compose_array(0, 2, ys).tolist())
    print("hatU_{-2,0}(x)  =", dual.compose_array(-2, 0, ys).tolist(),
          "(-1 marks ranks beyond the window)")

    checked = violations = 0
    twofold = twofold_dual(grid)
    for a in range(grid.t_start, grid.t_end + 1):
        for b in range(a, grid.t_end + 1):
            for rep in (verify_siegmund(grid, a, b, dual),
                        verify_twofold_shift(grid, a, b, twofold)):
                checked += rep.checked
                violations += len(rep.violations)
    print(f"\nall windows: {checked} determined comparisons, {violations} violations")

    # grids round-trip through JSON unchanged
    assert ReproductionGrid.from_json(grid.to_json()) == grid


if __name__ == "__main__":
    show_one_step()
    show_grid()
