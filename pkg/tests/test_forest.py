import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gwdual.core import TRUNCATED, ReproductionGrid
from gwdual.duality import TimeReverse, dual_grid
from gwdual.forest import (
    ForestGraph, build_dual_forest, build_primary_forest, check_noncrossing,
    check_noncrossing_forests, export_dot, export_svg, flip_correspondence,
    follow_dual, follow_primary, lineage_polylines,
)

SVG = "{http://www.w3.org/2000/svg}"


def grids(max_rows=5, max_width=7):
    return st.integers(1, max_width).flatmap(lambda w: st.lists(
        st.lists(st.integers(0, 3), min_size=w, max_size=w), min_size=1, max_size=max_rows))


def test_single_row_parents():
    g = ReproductionGrid.from_offspring([[2, 0, 1]])
    p = build_primary_forest(g)
    parents = {child[0]: par[0] for par, child in p.edges}
    assert [parents[x] for x in (1, 2, 3)] == [1, 1, 3]
    assert parents[0] == 0


def test_identity_forests_are_vertical_lines():
    g = ReproductionGrid.identity(0, 4, 5)
    for f in (build_primary_forest(g), build_dual_forest(g)):
        lines = lineage_polylines(f)
        assert len(lines) == 6
        assert all(len({x for x, _ in line}) == 1 for line in lines)
        assert not f.clipped_edges


def test_rank_zero_dual_line():
    g = ReproductionGrid.from_offspring([[2, 0, 1], [0, 1, 3], [1, 1, 1]])
    d = build_dual_forest(g)
    assert all(((0, t), (0, t + 1)) in d.edges for t in range(3))


@settings(max_examples=150)
@given(grids())
def test_primary_forest_invariants(rows):
    g = ReproductionGrid.from_offspring(rows)
    p = build_primary_forest(g)
    for t in range(g.t_start, g.t_end):
        kids = sorted((child[0], par[0]) for par, child in p.edges if par[1] == t)
        known = min(g.row(t).top, g.width)
        assert [k for k, _ in kids] == list(range(known + 1))
        pars = [q for _, q in kids]
        assert pars == sorted(pars)


@settings(max_examples=150)
@given(grids())
def test_path_following_equals_composition(rows):
    g = ReproductionGrid.from_offspring(rows)
    d, p, tr = build_dual_forest(g), build_primary_forest(g), TimeReverse(g)
    for a in range(g.t_start, g.t_end + 1):
        for b in range(a, g.t_end + 1):
            for x in range(g.width + 1):
                assert follow_dual(d, x, a, b) == g.compose(a, b, x)
                assert follow_primary(p, x, b, a) == tr.compose(b, a, x)


@settings(max_examples=150)
@given(grids())
def test_noncrossing_and_flip(rows):
    g = ReproductionGrid.from_offspring(rows)
    assert check_noncrossing(g).passed
    ok, details = flip_correspondence(g)
    assert ok, details


def test_corrupted_edge_is_located():
    g = ReproductionGrid.from_offspring([[1, 2, 0, 1], [2, 0, 1, 1]])
    p, d = build_primary_forest(g), build_dual_forest(g)
    edges = list(p.edges)
    i = edges.index(((2, 0), (3, 1)))
    edges[i] = ((3, 0), (3, 1))
    bad = ForestGraph("primary", 0.0, p.t_start, p.t_end, p.width, p.nodes, edges)
    rep = check_noncrossing_forests(bad, d)
    assert not rep.passed
    assert {v["t"] for v in rep.violations} == {0}
    assert all(v["primary_edge"] == [[3, 0], [3, 1]] for v in rep.violations)


def test_dual_of_dual_forest_is_shifted_primary():
    g = ReproductionGrid.from_offspring([[2, 0, 1, 1], [1, 1, 0, 2], [0, 3, 1, 0]])
    tw = dual_grid(dual_grid(g))
    p, pt = build_primary_forest(g), build_primary_forest(tw)
    shifted = {((a + 1, t), (b + 1, s)) for (a, t), (b, s) in p.edges}
    inner = {e for e in pt.edges if e[1][0] >= 1 and e[1][0] <= g.width}
    assert {e for e in shifted if e[1][0] <= g.width and e[0][0] <= g.width} <= inner | set(pt.clipped_edges)


def test_dot_export(tmp_path):
    g = ReproductionGrid.from_offspring([[2, 0, 1]], t_start=-1)
    text = export_dot([build_primary_forest(g), build_dual_forest(g)], tmp_path / "f.dot")
    assert '"-1_1" -> "0_2";' in text
    assert '"-1_1.5" -> "0_2.5" [color=red];' in text
    assert (tmp_path / "f.dot").read_text() == text
    assert export_dot([]).startswith("digraph")


def _forest_groups(svg_text):
    root = ET.fromstring(svg_text)
    return {g.get("class").split()[1]: g for g in root.iter(SVG + "g")
            if (g.get("class") or "").startswith("forest")}


def test_svg_identity_polylines():
    g = ReproductionGrid.identity(0, 6, 6)
    text = export_svg([build_primary_forest(g), build_dual_forest(g)], meta={"seed": 0})
    groups = _forest_groups(text)
    for kind in ("primary", "dual"):
        assert len(groups[kind].findall(SVG + "polyline")) == 7
    assert "<!-- seed=0 -->" in text


def test_svg_empty_document():
    root = ET.fromstring(export_svg([]))
    assert root.tag == SVG + "svg"


def test_svg_dual_is_offset_by_half():
    g = ReproductionGrid.identity(0, 1, 1)
    groups = _forest_groups(export_svg([build_primary_forest(g), build_dual_forest(g)],
                                       scale=10))
    xp = {float(c.get("cx")) for c in groups["primary"].iter(SVG + "circle")}
    xd = {float(c.get("cx")) for c in groups["dual"].iter(SVG + "circle")}
    assert sorted(xd) == [v + 5 for v in sorted(xp)]
