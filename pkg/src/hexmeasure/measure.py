"""Measures supported on finitely many lattice-direction segments and rays."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import hexgeom as hg
from .hexgeom import Point

M = "M"
MSTAR = "Mstar"
VARIANTS = (M, MSTAR)

# side crossed by an exit ray of type j, per variant
EXIT_SIDE = {M: {1: 1, 2: 2, 3: 3}, MSTAR: {1: 2, 2: 3, 3: 1}}


class InvalidMeasure(ValueError):
    """Base class for measure validation failures."""


class StructuralError(InvalidMeasure):
    pass


class BalanceError(InvalidMeasure):
    def __init__(self, vertex: Point, deltas: Tuple[Fraction, Fraction, Fraction]):
        self.vertex = vertex
        self.deltas = deltas
        a, b = vertex
        super().__init__(
            f"balance fails at ({hg.fmt_rat(a)}, {hg.fmt_rat(b)}): "
            f"differences {[hg.fmt_rat(d) for d in deltas]}"
        )


class InvariantViolation(RuntimeError):
    """An internal consistency check failed; indicates a bug or a bad input that slipped through."""


class Falsification(InvariantViolation):
    """A stated identity failed on a rigid input."""


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    density: Fraction


@dataclass(frozen=True)
class Ray:
    base: int
    j: int
    density: Fraction


@dataclass(frozen=True)
class ExitEvent:
    location: Point
    side: int
    x: Fraction
    direction: int
    density: Fraction


@dataclass(frozen=True)
class Attachment:
    location: Point
    side: int
    x: Fraction
    density: Fraction


@dataclass(frozen=True)
class Measure:
    variant: str
    r: Fraction
    vertices: Tuple[Point, ...] = ()
    edges: Tuple[Edge, ...] = ()
    rays: Tuple[Ray, ...] = field(default=())

    def ray_dir(self, ray: Ray) -> int:
        k = hg.W[ray.j]
        return k if self.variant == M else hg.rotate(k, 3)

    @cached_property
    def index(self) -> Dict[Point, int]:
        return {p: i for i, p in enumerate(self.vertices)}

    @cached_property
    def star(self) -> Dict[int, Dict[int, Fraction]]:
        """vertex id -> {direction index: density} over incident edges and rays."""
        out: Dict[int, Dict[int, Fraction]] = defaultdict(dict)
        for e in self.edges:
            k, _ = hg.direction_of(hg.sub(self.vertices[e.v], self.vertices[e.u]))
            out[e.u][k] = out[e.u].get(k, 0) + e.density
            out[e.v][(k + 3) % 6] = out[e.v].get((k + 3) % 6, 0) + e.density
        for ray in self.rays:
            k = self.ray_dir(ray)
            out[ray.base][k] = out[ray.base].get(k, 0) + ray.density
        return out

    def edge_length(self, e: Edge) -> Fraction:
        return hg.length(self.vertices[e.u], self.vertices[e.v])

    def is_zero(self) -> bool:
        return not self.edges and not self.rays

    def with_edges(self, densities: Sequence[Fraction], ray_densities: Sequence[Fraction]) -> "Measure":
        """Same support with new densities; zero entries are dropped."""
        segs = [
            (self.vertices[e.u], self.vertices[e.v], d)
            for e, d in zip(self.edges, densities)
            if d != 0
        ]
        rays = [
            (self.vertices[ray.base], ray.j, d)
            for ray, d in zip(self.rays, ray_densities)
            if d != 0
        ]
        return from_segments(self.variant, self.r, segs, rays)


def _line_key(p: Point, k: int) -> Tuple[int, Fraction]:
    c = k % 3
    a, b = p
    return (c, (b, a - b, a)[c])


def _meet(key1: Tuple[int, Fraction], key2: Tuple[int, Fraction]) -> Optional[Point]:
    """Intersection of two lattice lines given by their keys."""
    (c1, v1), (c2, v2) = sorted((key1, key2))
    if c1 == c2:
        return None
    if (c1, c2) == (0, 1):
        return (v2 + v1, v1)
    if (c1, c2) == (0, 2):
        return (v2, v1)
    return (v2, v2 - v1)


def _param(p: Point, c: int) -> Fraction:
    return p[1] if c == 2 else p[0]


def from_segments(
    variant: str,
    r,
    segments: Iterable[Tuple[Point, Point, Fraction]],
    rays: Iterable[Tuple[Point, int, Fraction]] = (),
) -> Measure:
    """Build the canonical measure for a superposition of weighted segments and rays.

    Collinear overlaps add densities, crossings and touching points become
    vertices, and straight pass-through vertices of equal density are merged.
    """
    r = hg.rat(r)
    segs = []
    for p, q, d in segments:
        d = hg.rat(d)
        if d == 0 or p == q:
            continue
        dk = hg.direction_of(hg.sub(q, p))
        if dk is None:
            raise StructuralError(f"segment {p}-{q} is not parallel to w1, w2 or w3")
        segs.append((p, q, d, dk[0] % 3))
    ray_acc: Dict[Tuple[Point, int], Fraction] = defaultdict(Fraction)
    for base, j, d in rays:
        d = hg.rat(d)
        if d != 0:
            ray_acc[(base, j)] += d

    points = set()
    for p, q, _, _ in segs:
        points.add(p)
        points.add(q)
    for base, _ in ray_acc:
        points.add(base)
    keyed = [(p, q, c, _line_key(p, c)) for p, q, _, c in segs]
    for (p1, q1, c1, k1), (p2, q2, c2, k2) in combinations(keyed, 2):
        if c1 == c2:
            continue
        x = _meet(k1, k2)
        if _within(x, p1, q1, c1) and _within(x, p2, q2, c2):
            points.add(x)

    by_line: Dict[Tuple[int, Fraction], List] = defaultdict(list)
    for p, q, d, c in segs:
        by_line[_line_key(p, c)].append((p, q, d))
    pieces: Dict[Tuple[Point, Point], Fraction] = {}
    points_on: Dict[Tuple[int, Fraction], set] = defaultdict(set)
    for x in points:
        for c in (0, 1, 2):
            key = _line_key(x, c)
            if key in by_line:
                points_on[key].add(x)
    for key, items in by_line.items():
        c = key[0]
        on = sorted(points_on[key], key=lambda x: _param(x, c))
        for x, y in zip(on, on[1:]):
            tot = Fraction(0)
            for p, q, d in items:
                lo, hi = sorted((_param(p, c), _param(q, c)))
                if lo <= _param(x, c) and _param(y, c) <= hi:
                    tot += d
            if tot != 0:
                pieces[(x, y)] = tot

    # merge straight degree-2 vertices with equal densities
    changed = True
    while changed:
        changed = False
        inc: Dict[Point, List[Tuple[Point, Point]]] = defaultdict(list)
        for key in pieces:
            inc[key[0]].append(key)
            inc[key[1]].append(key)
        ray_pts = {base for base, _ in ray_acc}
        for v, keys in inc.items():
            if len(keys) != 2 or v in ray_pts:
                continue
            k1, k2 = keys
            if pieces[k1] != pieces[k2]:
                continue
            ends = [k1[0] if k1[1] == v else k1[1], k2[0] if k2[1] == v else k2[1]]
            d1 = hg.direction_of(hg.sub(ends[0], v))
            d2 = hg.direction_of(hg.sub(ends[1], v))
            if (d1[0] - d2[0]) % 6 != 3:
                continue
            d = pieces.pop(k1)
            pieces.pop(k2)
            a, b = sorted(ends)
            pieces[(a, b)] = d
            changed = True
            break

    verts = set()
    for x, y in pieces:
        verts.add(x)
        verts.add(y)
    verts |= {base for base, _ in ray_acc}
    vertices = tuple(sorted(verts))
    idx = {p: i for i, p in enumerate(vertices)}
    edges = []
    for (x, y), d in pieces.items():
        u, v = sorted((idx[x], idx[y]))
        edges.append(Edge(u, v, d))
    edges.sort(key=lambda e: (e.u, e.v))
    out_rays = sorted(
        (Ray(idx[base], j, d) for (base, j), d in ray_acc.items()), key=lambda ray: (ray.base, ray.j)
    )
    return Measure(variant, r, vertices, tuple(edges), tuple(out_rays))


def _within(x: Point, p: Point, q: Point, c: int) -> bool:
    lo, hi = sorted((_param(p, c), _param(q, c)))
    return lo <= _param(x, c) <= hi


def canonical(m: Measure) -> Measure:
    return from_segments(
        m.variant,
        m.r,
        [(m.vertices[e.u], m.vertices[e.v], e.density) for e in m.edges],
        [(m.vertices[ray.base], ray.j, ray.density) for ray in m.rays],
    )


def segments_of(m: Measure):
    segs = [(m.vertices[e.u], m.vertices[e.v], e.density) for e in m.edges]
    rays = [(m.vertices[ray.base], ray.j, ray.density) for ray in m.rays]
    return segs, rays


# -- validation ------------------------------------------------------------


def deltas_at(m: Measure, vid: int) -> Tuple[Fraction, Fraction, Fraction]:
    """(d1+ - d1-, d2+ - d2-, d3+ - d3-) at a vertex."""
    out = [Fraction(0)] * 3
    for k, d in m.star.get(vid, {}).items():
        j, sign = hg.DIR_TO_W[k]
        out[j - 1] += sign * d
    return tuple(out)


def structural_problems(m: Measure) -> List[str]:
    probs: List[str] = []
    if m.variant not in VARIANTS:
        probs.append(f"unknown variant {m.variant!r}")
        return probs
    if not isinstance(m.r, Fraction) or m.r <= 0:
        probs.append("triangle size r must be a positive rational")
        return probs
    if len(set(m.vertices)) != len(m.vertices):
        probs.append("duplicate vertices")
    for p in m.vertices:
        if not hg.in_triangle(p, m.r):
            probs.append(f"vertex {_fp(p)} lies outside the triangle")
    n = len(m.vertices)
    used = set()
    for i, e in enumerate(m.edges):
        if not (0 <= e.u < n and 0 <= e.v < n) or e.u == e.v:
            probs.append(f"edge {i} has bad endpoints")
            continue
        used.update((e.u, e.v))
        if e.density <= 0:
            probs.append(f"edge {i} has non-positive density {hg.fmt_rat(e.density)}")
        if hg.direction_of(hg.sub(m.vertices[e.v], m.vertices[e.u])) is None:
            probs.append(f"edge {i} is not parallel to w1, w2 or w3")
    for i, ray in enumerate(m.rays):
        if not 0 <= ray.base < n:
            probs.append(f"ray {i} has a bad base")
            continue
        used.add(ray.base)
        if ray.j not in (1, 2, 3):
            probs.append(f"ray {i} has bad type {ray.j}")
            continue
        if ray.density <= 0:
            probs.append(f"ray {i} has non-positive density {hg.fmt_rat(ray.density)}")
        p = m.vertices[ray.base]
        if not hg.on_boundary(p, m.r):
            probs.append(f"ray {i} base {_fp(p)} is not on the triangle boundary")
        elif not hg.exits_outward(p, m.ray_dir(ray), m.r):
            probs.append(f"ray {i} at {_fp(p)} does not point strictly outward")
    if probs:
        return probs
    if len(used) != n:
        probs.append("isolated vertex")
    keys = set()
    for i, ray in enumerate(m.rays):
        if (ray.base, ray.j) in keys:
            probs.append(f"ray {i} duplicates another ray")
        keys.add((ray.base, ray.j))
    segs = []
    for e in m.edges:
        p, q = m.vertices[e.u], m.vertices[e.v]
        k = hg.direction_of(hg.sub(q, p))
        if k is None:
            continue
        segs.append((p, q, k[0] % 3))
    on_line: Dict[Tuple[int, Fraction], List[Point]] = defaultdict(list)
    for x in m.vertices:
        for c in (0, 1, 2):
            on_line[_line_key(x, c)].append(x)
    for p, q, c in segs:
        for x in on_line[_line_key(p, c)]:
            if x != p and x != q and _within(x, p, q, c):
                probs.append(f"vertex {_fp(x)} lies inside edge {_fp(p)}-{_fp(q)}")
    for (p1, q1, c1), (p2, q2, c2) in combinations(segs, 2):
        if c1 == c2:
            if _line_key(p1, c1) == _line_key(p2, c2):
                lo1, hi1 = sorted((_param(p1, c1), _param(q1, c1)))
                lo2, hi2 = sorted((_param(p2, c2), _param(q2, c2)))
                if max(lo1, lo2) < min(hi1, hi2):
                    probs.append(f"edges {_fp(p1)}-{_fp(q1)} and {_fp(p2)}-{_fp(q2)} overlap")
            continue
        x = _meet(_line_key(p1, c1), _line_key(p2, c2))
        if not (_within(x, p1, q1, c1) and _within(x, p2, q2, c2)):
            continue
        if x not in (p1, q1) or x not in (p2, q2):
            probs.append(f"edges {_fp(p1)}-{_fp(q1)} and {_fp(p2)}-{_fp(q2)} cross away from a vertex")
    return probs


def validate(m: Measure) -> None:
    """Raise StructuralError or BalanceError for the first violation in canonical order."""
    probs = structural_problems(m)
    if probs:
        raise StructuralError(probs[0])
    for vid in sorted(range(len(m.vertices)), key=lambda i: m.vertices[i]):
        d = deltas_at(m, vid)
        if not d[0] == d[1] == d[2]:
            raise BalanceError(m.vertices[vid], d)


def is_valid(m: Measure) -> bool:
    try:
        validate(m)
    except InvalidMeasure:
        return False
    return True


def _fp(p: Point) -> str:
    return f"({hg.fmt_rat(p[0])}, {hg.fmt_rat(p[1])})"


# -- exit data -----------------------------------------------------------


def exit_events(m: Measure) -> List[ExitEvent]:
    out = []
    for ray in m.rays:
        p = m.vertices[ray.base]
        side = EXIT_SIDE[m.variant][ray.j]
        x = hg.coordinate_on_side(p, m.r, side)
        out.append(ExitEvent(p, side, x, m.ray_dir(ray), ray.density))
    out.sort(key=lambda ev: (ev.side, ev.x, ev.direction))
    return out


def weight(m: Measure) -> Fraction:
    sums = {1: Fraction(0), 2: Fraction(0), 3: Fraction(0)}
    for ray in m.rays:
        sums[ray.j] += ray.density
    if not sums[1] == sums[2] == sums[3]:
        raise InvariantViolation(f"directional exit sums differ: {sums}")
    return sums[1]


def attachments(m: Measure) -> List[Attachment]:
    """Exit locations with a nonzero coordinate, ordered by (side, coordinate)."""
    by_loc: Dict[Point, List[ExitEvent]] = defaultdict(list)
    for ev in exit_events(m):
        by_loc[ev.location].append(ev)
    out = []
    for loc, evs in by_loc.items():
        nz = [ev for ev in evs if ev.x != 0]
        if not nz:
            continue
        ev = nz[0]
        out.append(Attachment(loc, ev.side, ev.x, sum((e.density for e in evs), Fraction(0))))
    out.sort(key=lambda at: (at.side, at.x))
    return out


def att(m: Measure) -> int:
    return len(attachments(m))


def trace_check(m: Measure) -> Tuple[Fraction, Fraction, bool]:
    if m.variant != M:
        raise ValueError("trace identity is stated for variant M")
    lhs = sum((ev.density * ev.x for ev in exit_events(m)), Fraction(0))
    rhs = m.r * weight(m)
    return lhs, rhs, lhs == rhs


# -- cone operations ---------------------------------------------------------


def scale(m: Measure, c) -> Measure:
    c = hg.rat(c)
    if c <= 0:
        raise ValueError("scale factor must be positive")
    segs, rays = segments_of(m)
    return from_segments(m.variant, m.r, [(p, q, d * c) for p, q, d in segs], [(b, j, d * c) for b, j, d in rays])


def add(m1: Measure, m2: Measure) -> Measure:
    if m1.variant != m2.variant or m1.r != m2.r:
        raise ValueError("measures live in different cones")
    s1, r1 = segments_of(m1)
    s2, r2 = segments_of(m2)
    return from_segments(m1.variant, m1.r, s1 + s2, r1 + r2)


def translate(m: Measure, v: Point, r=None) -> Measure:
    segs, rays = segments_of(m)
    return from_segments(
        m.variant,
        m.r if r is None else r,
        [(hg.add(p, v), hg.add(q, v), d) for p, q, d in segs],
        [(hg.add(b, v), j, d) for b, j, d in rays],
    )


def branch_points(m: Measure) -> List[Point]:
    return [m.vertices[v] for v, st in sorted(m.star.items()) if sum(1 for d in st.values() if d) >= 3]


# -- serialization -----------------------------------------------------------


class InputError(ValueError):
    """Malformed measure file."""


def to_dict(m: Measure) -> dict:
    f = hg.fmt_rat
    return {
        "variant": m.variant,
        "r": f(m.r),
        "vertices": [{"a": f(a), "b": f(b)} for a, b in m.vertices],
        "edges": [{"u": e.u, "v": e.v, "density": f(e.density)} for e in m.edges],
        "rays": [{"base": ray.base, "j": ray.j, "density": f(ray.density)} for ray in m.rays],
    }


def dumps(m: Measure) -> str:
    return json.dumps(to_dict(canonical(m)), indent=2) + "\n"


def from_dict(data: dict, *, canonicalize: bool = True) -> Measure:
    try:
        variant = data["variant"]
        r = hg.rat(data["r"])
        verts = tuple((hg.rat(v["a"]), hg.rat(v["b"])) for v in data.get("vertices", []))
        edges = tuple(Edge(int(e["u"]), int(e["v"]), hg.rat(e["density"])) for e in data.get("edges", []))
        rays = tuple(Ray(int(x["base"]), int(x["j"]), hg.rat(x["density"])) for x in data.get("rays", []))
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise InputError(f"schema violation: {exc!r}") from exc
    m = Measure(variant, r, verts, edges, rays)
    probs = structural_problems(m)
    if probs:
        raise StructuralError(probs[0])
    return canonical(m) if canonicalize else m


def loads(text: str) -> Measure:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InputError("line 1, column 1: top-level value must be an object")
    return from_dict(data)


def read_measure(path) -> Measure:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def write_measure(m: Measure, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(m))


def equal(m1: Measure, m2: Measure) -> bool:
    return m1 == m2 or canonical(m1) == canonical(m2)


def ray_at(m: Measure, p: Point, j: int) -> Optional[Fraction]:
    vid = m.index.get(p)
    if vid is None:
        return None
    for ray in m.rays:
        if ray.base == vid and ray.j == j:
            return ray.density
    return None
