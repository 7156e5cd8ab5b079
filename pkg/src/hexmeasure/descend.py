"""Descendance between support segments and the extremal decomposition."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import hexgeom as hg
from . import linalg
from .measure import (
    Attachment,
    Falsification,
    InvariantViolation,
    Measure,
    add,
    attachments,
    equal,
    exit_events,
    from_segments,
    scale,
    validate,
)
from .puzzle import is_rigid

# a node is ("e", edge index) or ("r", ray index)
Node = Tuple[str, int]


class NotRigidError(ValueError):
    pass


@dataclass
class DescendanceGraph:
    measure: Measure
    nodes: List[Node]
    arcs: List[Tuple[int, int, int]]  # (from node, to node, shared vertex id)
    scc: List[int]  # node -> component id
    components: List[List[int]]

    def successors(self, i: int) -> List[int]:
        return [b for a, b, _ in self.arcs if a == i]

    def reachable(self, start: Sequence[int]) -> List[int]:
        succ: Dict[int, List[int]] = {}
        for a, b, _ in self.arcs:
            succ.setdefault(a, []).append(b)
        seen = set(start)
        stack = list(start)
        while stack:
            x = stack.pop()
            for y in succ.get(x, []):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        return sorted(seen)


def _incidences(m: Measure):
    """vertex id -> list of (node index, direction leaving the vertex)."""
    nodes: List[Node] = [("e", i) for i in range(len(m.edges))] + [("r", i) for i in range(len(m.rays))]
    inc: Dict[int, List[Tuple[int, int]]] = {}
    for i, e in enumerate(m.edges):
        k, _ = hg.direction_of(hg.sub(m.vertices[e.v], m.vertices[e.u]))
        inc.setdefault(e.u, []).append((i, k))
        inc.setdefault(e.v, []).append((i, (k + 3) % 6))
    off = len(m.edges)
    for i, ray in enumerate(m.rays):
        inc.setdefault(ray.base, []).append((off + i, m.ray_dir(ray)))
    return nodes, inc


def _descends(k1: int, k2: int, dens: Dict[int, Fraction]) -> bool:
    """Does the segment arriving from direction k1 pass to the one leaving along k2?"""
    z = lambda k: not dens.get(k % 6, 0)
    if k2 == (k1 + 3) % 6:
        return z(k2 + 1) or z(k2 - 1)
    if k2 in ((k1 + 2) % 6, (k1 + 4) % 6):
        return z(k1 + 3)
    return False


def _tarjan(n: int, succ: List[List[int]]) -> List[int]:
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    comp = [-1] * n
    stack: List[int] = []
    counter = 0
    ncomp = 0
    for s in range(n):
        if index[s] >= 0:
            continue
        work = [(s, 0)]
        index[s] = low[s] = counter
        counter += 1
        stack.append(s)
        on[s] = True
        while work:
            v, i = work[-1]
            if i < len(succ[v]):
                work[-1] = (v, i + 1)
                w = succ[v][i]
                if index[w] < 0:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on[w] = True
                    work.append((w, 0))
                elif on[w]:
                    low[v] = min(low[v], index[w])
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    low[u] = min(low[u], low[v])
                if low[v] == index[v]:
                    while True:
                        w = stack.pop()
                        on[w] = False
                        comp[w] = ncomp
                        if w == v:
                            break
                    ncomp += 1
    return comp


def descendance_graph(m: Measure) -> DescendanceGraph:
    validate(m)
    nodes, inc = _incidences(m)
    arcs = []
    nedges = len(m.edges)
    for vid in sorted(inc):
        dens = m.star.get(vid, {})
        for n1, k1 in inc[vid]:
            if n1 >= nedges:
                continue  # rays only receive
            for n2, k2 in inc[vid]:
                if n1 != n2 and _descends(k1, k2, dens):
                    arcs.append((n1, n2, vid))
    arcs.sort()
    succ: List[List[int]] = [[] for _ in nodes]
    for a, b, _ in arcs:
        succ[a].append(b)
    raw = _tarjan(len(nodes), succ)
    # renumber components by their smallest node
    order: Dict[int, int] = {}
    for i in range(len(nodes)):
        order.setdefault(raw[i], len(order))
    scc = [order[c] for c in raw]
    comps: List[List[int]] = [[] for _ in order]
    for i, c in enumerate(scc):
        comps[c].append(i)
    for a, b, _ in arcs:
        if _density(m, nodes[b]) < _density(m, nodes[a]):
            raise Falsification(f"density decreases along a descendance arc {nodes[a]} -> {nodes[b]}")
    return DescendanceGraph(m, nodes, arcs, scc, comps)


def _density(m: Measure, node: Node) -> Fraction:
    kind, i = node
    return m.edges[i].density if kind == "e" else m.rays[i].density


def root_edges(g: DescendanceGraph) -> List[List[int]]:
    """Root classes: source components of the condensation."""
    has_in = set()
    for a, b, _ in g.arcs:
        if g.scc[a] != g.scc[b]:
            has_in.add(g.scc[b])
    return [c for i, c in enumerate(g.components) if i not in has_in]


def ext(m: Measure) -> int:
    return len(root_edges(descendance_graph(m)))


def check_orientations(g: DescendanceGraph) -> None:
    """Every non-root segment gets one orientation from all descendance paths."""
    roots = {i for c in root_edges(g) for i in c}
    reach = set(g.reachable(sorted(roots)))
    if len(reach) != len(g.nodes):
        raise Falsification("some support segment is not a descendant of a root segment")
    start: Dict[int, set] = {}
    for a, b, vid in g.arcs:
        if b not in roots:
            start.setdefault(b, set()).add(vid)
    for b, vids in start.items():
        if len(vids) > 1:
            raise Falsification(f"descendance paths give segment {g.nodes[b]} two orientations")


def _segments(m: Measure, nodes: List[Node], x: Dict[int, Fraction]):
    segs, rays = [], []
    for i, val in x.items():
        if not val:
            continue
        kind, j = nodes[i]
        if kind == "e":
            e = m.edges[j]
            segs.append((m.vertices[e.u], m.vertices[e.v], val))
        else:
            ray = m.rays[j]
            rays.append((m.vertices[ray.base], ray.j, val))
    return segs, rays


def component_measure(m: Measure, cls: Sequence[int], g: Optional[DescendanceGraph] = None) -> Measure:
    """Measure on the descendants of a root class with density one on the class."""
    if g is None:
        g = descendance_graph(m)
    desc = g.reachable(list(cls))
    fixed = set(cls)
    unknown = [i for i in desc if i not in fixed]
    col = {n: c for c, n in enumerate(unknown)}
    _, inc = _incidences(m)
    rows, rhs = [], []
    for vid in sorted(inc):
        for coord in (0, 1):
            row = [Fraction(0)] * len(unknown)
            b = Fraction(0)
            touched = False
            for n, k in inc[vid]:
                comp = hg.DIRS[k][coord]
                if not comp:
                    continue
                if n in fixed:
                    b -= comp
                    touched = True
                elif n in col:
                    row[col[n]] += comp
                    touched = True
            if touched:
                rows.append(row)
                rhs.append(b)
    if unknown:
        sol, nullity = linalg.solve(rows, rhs)
        if sol is None:
            raise NotRigidError("balance cannot be met on the descendants of this class")
        if nullity:
            raise NotRigidError("densities on the descendants are not determined uniquely")
    else:
        if any(b for b in rhs):
            raise NotRigidError("balance cannot be met on the descendants of this class")
        sol = []
    x = {n: Fraction(1) for n in fixed}
    for n, c in col.items():
        x[n] = sol[c]
    bad = [v for v in x.values() if v <= 0 or v.denominator != 1]
    if bad:
        raise NotRigidError(f"component densities are not positive integers: {bad[0]}")
    segs, rays = _segments(m, g.nodes, x)
    out = from_segments(m.variant, m.r, segs, rays)
    validate(out)
    return out


@dataclass
class Component:
    measure: Measure
    delta: Fraction
    root: List[int]


@dataclass
class Decomposition:
    source: Measure
    components: List[Component]
    graph: DescendanceGraph

    @property
    def k(self) -> int:
        return len(self.components)


@lru_cache(maxsize=256)
def decompose(m: Measure) -> Decomposition:
    """Extremal decomposition of a rigid measure (results are shared; do not mutate)."""
    if is_rigid(m) is not True:
        raise NotRigidError("measure is not rigid; its extremal decomposition is not unique")
    g = descendance_graph(m)
    comps = []
    for cls in root_edges(g):
        ds = {_density(m, g.nodes[i]) for i in cls}
        if len(ds) != 1:
            raise Falsification("root class carries unequal densities")
        comps.append(Component(component_measure(m, cls, g), ds.pop(), list(cls)))
    dec = Decomposition(m, comps, g)
    if comps:
        total = scale(comps[0].measure, comps[0].delta)
        for c in comps[1:]:
            total = add(total, scale(c.measure, c.delta))
        if not equal(total, m):
            raise InvariantViolation("decomposition does not reconstruct the measure")
    elif not m.is_zero():
        raise InvariantViolation("nonzero measure without root classes")
    return dec


def exit_density_matrix(dec: Decomposition, atts: Optional[List[Attachment]] = None):
    """Rows are attachments, columns components; returns (matrix, rank)."""
    if atts is None:
        atts = attachments(dec.source)
    cols = []
    for c in dec.components:
        at: Dict = {}
        for ev in exit_events(c.measure):
            at[ev.location] = at.get(ev.location, Fraction(0)) + ev.density
        cols.append([at.get(a.location, Fraction(0)) for a in atts])
    mat = linalg.transpose(cols) if cols else [[] for _ in atts]
    rk = linalg.rank(mat) if atts and cols else 0
    if rk != dec.k:
        raise Falsification(f"exit density matrix has rank {rk} < {dec.k}")
    return mat, rk
