"""Primary (genealogy) and dual (lineage) forests of a mapping system.

Nodes are ``(x, t)`` pairs with ranks ``0..W`` and times ``t_start..t_end``.

* primary forest: each child ``(x, t+1)`` with ``x <= U_t(W)`` hangs from its
  parent ``(V_t(x), t)``; children above ``U_t(W)`` have no known parent and
  are recorded as clipped nodes.
* dual forest: ``(z, t) -> (U_t(z), t+1)``, drawn shifted right by one half.
  Edges whose target leaves the window are kept in ``clipped_edges``.

Both forests hold the rank-0 line, since ``U(0) = V(0) = 0``.
"""

from dataclasses import dataclass, field
from xml.sax.saxutils import escape

import numpy as np

from .core import TRUNCATED
from .duality import DualityReport, dual_grid, dual_mapping

PRIMARY_COLOR = "black"
DUAL_COLOR = "red"


@dataclass
class ForestGraph:
    kind: str
    shift: float
    t_start: int
    t_end: int
    width: int
    nodes: list = field(default_factory=list)
    edges: list = field(default_factory=list)
    clipped_edges: list = field(default_factory=list)
    clipped_nodes: list = field(default_factory=list)

    def edge_set(self, include_clipped=True):
        edges = set(self.edges)
        if include_clipped:
            edges.update(self.clipped_edges)
        return edges

    def successor(self):
        """Dual forest: node -> the node it leads to one generation up."""
        return {src: dst for src, dst in self.edges + self.clipped_edges}

    def parent(self):
        """Primary forest: child -> parent."""
        return {child: par for par, child in self.edges + self.clipped_edges}


def _nodes(system):
    return [(x, t) for t in range(system.t_start, system.t_end + 1)
            for x in range(system.width + 1)]


def build_primary_forest(system):
    """Genealogy edges ``((V_t(x), t), (x, t+1))``."""
    forest = ForestGraph("primary", 0.0, system.t_start, system.t_end, system.width,
                         _nodes(system))
    W = system.width
    for t in range(system.t_start, system.t_end):
        row = system.row(t)
        dual = dual_mapping(row)
        known = min(row.top, W)
        for x in range(0, known + 1):
            parent = dual(x)
            edge = ((parent, t), (x, t + 1))
            (forest.edges if parent <= W else forest.clipped_edges).append(edge)
        forest.clipped_nodes.extend((x, t + 1) for x in range(known + 1, W + 1))
    return forest


def build_dual_forest(system):
    """Lineage edges ``((z, t), (U_t(z), t+1))`` for ``z = 0..min(W, row width)``."""
    forest = ForestGraph("dual", 0.5, system.t_start, system.t_end, system.width,
                         _nodes(system))
    W = system.width
    for t in range(system.t_start, system.t_end):
        row = system.row(t)
        for z in range(0, min(W, row.width) + 1):
            target = row(z)
            edge = ((z, t), (target, t + 1))
            (forest.edges if target <= W else forest.clipped_edges).append(edge)
        forest.clipped_nodes.extend((z, t) for z in range(row.width + 1, W + 1))
    return forest


def follow_dual(forest, x, a, b):
    """End rank of the dual lineage from ``(x, a)`` after ``b - a`` steps."""
    succ = forest.successor()
    node = (x, a)
    for _ in range(a, b):
        if node not in succ or node[0] > forest.width:
            return TRUNCATED
        node = succ[node]
    return node[0]


def follow_primary(forest, x, b, a):
    """Ancestor rank at time ``a`` of the node ``(x, b)``."""
    par = forest.parent()
    node = (x, b)
    for _ in range(a, b):
        if node not in par:
            return TRUNCATED
        node = par[node]
    return node[0]


# ---------------------------------------------------------------------------
# non-crossing


def check_noncrossing_forests(primary, dual):
    """``x' <= z  <=>  x <= U_t(z)`` for every same-step primary/dual edge pair.

    Violations carry the offending pair as a witness.
    """
    report = DualityReport("noncrossing")
    by_t_p, by_t_d = {}, {}
    for (xp, t), (x, _) in primary.edges + primary.clipped_edges:
        by_t_p.setdefault(t, []).append((xp, x))
    for (z, t), (uz, _) in dual.edges + dual.clipped_edges:
        by_t_d.setdefault(t, []).append((z, uz))
    for t in sorted(set(by_t_p) & set(by_t_d)):
        p = np.array(by_t_p[t], dtype=np.int64)
        d = np.array(by_t_d[t], dtype=np.int64)
        lhs = p[:, :1] <= d[None, :, 0]
        rhs = p[:, 1:] <= d[None, :, 1]
        report.checked += lhs.size
        for i, j in np.argwhere(lhs != rhs):
            report.violations.append({
                "t": int(t),
                "primary_edge": [[int(p[i, 0]), int(t)], [int(p[i, 1]), int(t) + 1]],
                "dual_edge": [[int(d[j, 0]), int(t)], [int(d[j, 1]), int(t) + 1]],
            })
    return report


def check_noncrossing(system):
    return check_noncrossing_forests(build_primary_forest(system), build_dual_forest(system))


def flip_correspondence(grid):
    """Compare the flipped dual forest of ``grid`` with the primary forest of its dual.

    The map ``(r, t) -> (r + 1, -t)`` sends dual-forest edges of ``U`` to
    genealogy edges of ``hatU``. Edges are compared undirected, on child
    ranks ``1..min(W, p_t)`` with ``p_t = V_t(U_t(W))`` (the last child
    whose parent the dual row determines).

    Returns ``(equal, details)``.
    """
    dual_sys = dual_grid(grid)
    flipped = {}
    for (z, t), (uz, _) in build_dual_forest(grid).edge_set():
        child = (z + 1, -t)
        flipped[child] = frozenset([child, (uz + 1, -t - 1)])
    genealogy = {}
    for (par, s), (x, s1) in build_primary_forest(dual_sys).edge_set():
        genealogy[(x, s1)] = frozenset([(par, s), (x, s1)])
    W = grid.width
    limit = {}
    for t in range(grid.t_start, grid.t_end):
        row = grid.row(t)
        limit[-t] = min(W, int(dual_mapping(row)(row.top)))
    keep = lambda child: 1 <= child[0] <= limit.get(child[1], -1)
    a = {v for k, v in flipped.items() if keep(k)}
    b = {v for k, v in genealogy.items() if keep(k)}
    return a == b, {"compared": len(a), "only_flipped": len(a - b), "only_dual_primary": len(b - a)}


# ---------------------------------------------------------------------------
# export


def _label(t, x):
    return f"{t}_{x:g}" if isinstance(x, float) else f"{t}_{x}"


def export_dot(forests, path=None):
    """Graphviz text with nodes named ``"t_x"`` at their drawn rank.

    Dual nodes sit at ``x + 1/2`` and so get names like ``"2_3.5"``.
    """
    if isinstance(forests, ForestGraph):
        forests = [forests]
    out = ["digraph forest {", "  node [shape=point];"]
    for f in forests:
        color = PRIMARY_COLOR if f.kind == "primary" else DUAL_COLOR
        name = lambda n: _label(n[1], n[0] + f.shift if f.shift else n[0])
        for x, t in f.nodes:
            pos = f"{x + f.shift:g},{t:g}!"
            out.append(f'  "{name((x, t))}" [pos="{pos}", color={color}];')
        for src, dst in f.edges:
            attrs = "" if f.kind == "primary" else f" [color={color}]"
            out.append(f'  "{name(src)}" -> "{name(dst)}"{attrs};')
        for src, dst in f.clipped_edges:
            out.append(f'  // clipped {f.kind} edge {name(src)} -> {name(dst)}')
    out.append("}")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def lineage_polylines(forest):
    """Cover the in-window edges by maximal paths, one polyline per path.

    Each path starts at a node nobody continues into and follows the
    unique pointer (successor in the dual forest, parent in the primary
    forest) until it joins a node that is already drawn.
    """
    if forest.kind == "dual":
        ptr = {src: dst for src, dst in forest.edges}
    else:
        ptr = {child: par for par, child in forest.edges}
    targets = set(ptr.values())
    starts = sorted((n for n in ptr if n not in targets), key=lambda n: (n[1], n[0]))
    seen, lines = set(), []
    pending = list(starts)
    # cycles are impossible (time is monotone), but merged nodes can leave
    # pointer-only components unreached from the starts
    for node in sorted(ptr, key=lambda n: (n[1], n[0])):
        pending.append(node)
    for node in pending:
        if node in seen or node not in ptr:
            continue
        line = [node]
        seen.add(node)
        while node in ptr:
            node = ptr[node]
            line.append(node)
            if node in seen:
                break
            seen.add(node)
        lines.append(line)
    return lines


def export_svg(forests, path=None, meta=None, scale=40, leaf_ticks=True, draw_nodes=True):
    """SVG overlay: rank on the horizontal axis, time increasing upward.

    Every node is drawn at ``(x + shift, t)``. Clipped dual edges run as
    dashed stubs to the right border ``x = W``; childless nodes get a tick.
    ``meta`` (seed, law, window ...) is written into a leading comment.
    """
    if isinstance(forests, ForestGraph):
        forests = [forests]
    if forests:
        t0 = min(f.t_start for f in forests)
        t1 = max(f.t_end for f in forests)
        W = max(f.width for f in forests)
    else:
        t0 = t1 = W = 0
    pad = 1.0
    width_px = (W + 1 + 2 * pad) * scale
    height_px = (t1 - t0 + 2 * pad) * scale
    px = lambda x: (x + pad) * scale
    py = lambda t: (t1 - t + pad) * scale
    out = ['<?xml version="1.0" encoding="UTF-8"?>',
           f'<svg xmlns="http://www.w3.org/2000/svg" width="{width_px:g}" '
           f'height="{height_px:g}" viewBox="0 0 {width_px:g} {height_px:g}">']
    if meta:
        body = ", ".join(f"{k}={meta[k]}" for k in sorted(meta))
        out.append(f"<!-- {escape(body).replace('--', '- -')} -->")
    # grid and axis labels
    out.append('<g class="axes" stroke="#bbb" stroke-dasharray="1,3">')
    for t in range(t0, t1 + 1):
        out.append(f'<line x1="{px(0):g}" y1="{py(t):g}" x2="{px(W):g}" y2="{py(t):g}"/>')
    for x in range(W + 1):
        out.append(f'<line x1="{px(x):g}" y1="{py(t0):g}" x2="{px(x):g}" y2="{py(t1):g}"/>')
    out.append("</g>")
    out.append('<g class="labels" font-size="12" font-family="sans-serif">')
    for t in range(t0, t1 + 1):
        out.append(f'<text x="{px(-0.7):g}" y="{py(t) + 4:g}">{t}</text>')
    for x in range(W + 1):
        out.append(f'<text x="{px(x) - 3:g}" y="{py(t0) + 16:g}">{x}</text>')
    out.append("</g>")
    for f in forests:
        color = PRIMARY_COLOR if f.kind == "primary" else DUAL_COLOR
        s = f.shift
        out.append(f'<g class="forest {f.kind}" stroke="{color}" fill="none" '
                   f'data-nodes="{len(f.nodes)}" data-edges="{len(f.edges)}" '
                   f'data-clipped="{len(f.clipped_edges)}">')
        for line in lineage_polylines(f):
            pts = " ".join(f"{px(x + s):g},{py(t):g}" for x, t in line)
            out.append(f'<polyline class="lineage" points="{pts}"/>')
        for (x, t), (y, t_next) in f.clipped_edges:
            # cut the straight edge where it leaves the window
            if f.kind == "dual":
                frac = (W - x) / (y - x)
                end = (W + s, t + frac * (t_next - t))
                start = (x + s, t)
            else:
                frac = (W - y) / (x - y)
                end = (W + s, t_next - frac * (t_next - t))
                start = (y + s, t_next)
            out.append(f'<line class="clipped" stroke-dasharray="3,2" x1="{px(start[0]):g}" '
                       f'y1="{py(start[1]):g}" x2="{px(end[0]):g}" y2="{py(end[1]):g}"/>')
        if leaf_ticks:
            for x, t in _leaves(f):
                out.append(f'<line class="tick" x1="{px(x + s) - 3:g}" y1="{py(t):g}" '
                           f'x2="{px(x + s) + 3:g}" y2="{py(t):g}"/>')
        if draw_nodes:
            for x, t in f.nodes:
                out.append(f'<circle class="node" cx="{px(x + s):g}" cy="{py(t):g}" r="1.5" '
                           f'fill="{color}"/>')
        out.append("</g>")
    out.append("</svg>")
    text = "\n".join(out) + "\n"
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _leaves(forest):
    """Childless nodes: no genealogy child (primary) or no incoming lineage (dual)."""
    if forest.kind == "primary":
        has_child = {par for par, _ in forest.edges + forest.clipped_edges}
        return [n for n in forest.nodes if n not in has_child and n[1] < forest.t_end]
    fed = {dst for _, dst in forest.edges}
    return [n for n in forest.nodes if n not in fed and n[1] > forest.t_start]
