"""Puzzles, the gentle-cycle rigidity test and duality."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import hexgeom as hg
from .arrangement import Affine, Arrangement, HiveFunction, build_arrangement, build_hive, local_pieces
from .hexgeom import Point
from .measure import (
    MSTAR,
    M,
    InvariantViolation,
    Measure,
    _line_key,
    from_segments,
    validate,
    weight,
)

Polygon = List[Point]


def tau(f: Affine, variant: str) -> Point:
    """Puzzle offset of an affine piece of the hive function."""
    p, q = f[0], f[1]
    if variant == M:
        return (p, p + q)
    return (p + q, q)


def face_offsets(m: Measure, hive: Optional[HiveFunction] = None) -> Dict[int, Point]:
    if hive is None:
        hive = build_hive(m)
    return {fid: tau(f, m.variant) for fid, f in hive.pieces.items()}


def _turn(variant: str) -> int:
    return -1 if variant == M else 1


def _check_jump(k: int, t0: Point, t1: Point, density: Fraction, variant: str) -> None:
    d = hg.direction_of(hg.sub(t1, t0))
    if density == 0:
        if t0 != t1:
            raise InvariantViolation("offset jumps across an edge of zero density")
        return
    if d is None or d[1] != density or (d[0] - k) % 3 != _turn(variant) % 3:
        raise InvariantViolation(f"offset jump {hg.sub(t1, t0)} does not match density {density} in direction {k}")


# -- puzzle --------------------------------------------------------------------


def polygon_area2(poly: Polygon) -> Fraction:
    return sum((hg.cross(poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))), Fraction(0))


def convex_hull(points) -> Polygon:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and hg.orient(out[-2], out[-1], p) <= 0:
                out.pop()
            out.append(p)
        return out

    lower, upper = half(pts), half(reversed(pts))
    return lower[:-1] + upper[:-1]


def _translate(poly: Polygon, v: Point) -> Polygon:
    return [hg.add(p, v) for p in poly]


def _separated(p1: Polygon, p2: Polygon) -> bool:
    for poly, other in ((p1, p2), (p2, p1)):
        n = len(poly)
        for i in range(n):
            a, b = poly[i], poly[(i + 1) % n]
            if a == b:
                continue
            if all(hg.orient(a, b, x) <= 0 for x in other):
                return True
    return False


@dataclass
class Piece:
    kind: str  # "white", "parallelogram" or "branch"
    polygon: Polygon
    source: object  # face id, edge id or vertex point


@dataclass
class Puzzle:
    variant: str
    size: Fraction
    pieces: List[Piece]
    offsets: Dict[int, Point]
    arcs: List[Tuple[Point, Point, int]] = field(default_factory=list)

    def count(self, kind: str) -> int:
        return sum(1 for p in self.pieces if p.kind == kind)


def build_puzzle(m: Measure) -> Puzzle:
    validate(m)
    arr = build_arrangement(m)
    hive = build_hive(m, arr)
    offsets = face_offsets(m, hive)
    pieces: List[Piece] = []
    for face in arr.faces:
        pieces.append(Piece("white", _translate(face.polygon, offsets[face.id]), face.id))

    arcs = []
    for eid, g in enumerate(arr.edges):
        if g.measure_edge is None:
            continue
        h = 2 * eid
        if arr.face_of[h] < 0:
            h ^= 1
        P, Q = arr.he_points(h)
        k = arr.hdir[h]
        tF = offsets[arr.face_of[h]]
        tG = tau(hive.exterior(h), m.variant) if arr.face_of[h ^ 1] < 0 else offsets[arr.face_of[h ^ 1]]
        _check_jump(k, tF, tG, g.density, m.variant)
        corners = [hg.add(P, tF), hg.add(Q, tF), hg.add(Q, tG), hg.add(P, tG)]
        poly = corners if polygon_area2(corners) > 0 else corners[::-1]
        pieces.append(Piece("parallelogram", poly, g.measure_edge))
        s, _ = hg.direction_of(hg.sub(tG, tF))
        acute_at_p = (s - k) % 6 in (1, 5)
        c0, c1, c2, c3 = corners
        if acute_at_p:
            sides = [(c0, c1), (c0, c3), (c2, c3), (c2, c1)]
        else:
            sides = [(c1, c0), (c3, c0), (c3, c2), (c1, c2)]
        arcs.extend(sides)

    for pid, p in enumerate(arr.points):
        if pid >= len(m.vertices):
            continue
        loc = local_pieces(arr, hive, pid)
        pts = {hg.add(p, tau(f, m.variant)) for f in loc.values()}
        hull = convex_hull(pts)
        if len(hull) >= 3 and polygon_area2(hull) > 0:
            pieces.append(Piece("branch", hull, p))

    size = m.r + weight(m)
    _check_tiling(pieces, size)
    puzzle = Puzzle(m.variant, size, pieces, offsets)
    puzzle.arcs = _subdivide(arcs, pieces)
    return puzzle


def _check_tiling(pieces: List[Piece], size: Fraction) -> None:
    allpts = [x for pc in pieces for x in pc.polygon]
    beta = min(x[1] for x in allpts)
    alpha = max(x[0] for x in allpts)
    gamma = min(x[0] - x[1] for x in allpts)
    if alpha - beta - gamma != size:
        raise InvariantViolation(f"puzzle does not fit a triangle of side {size}")
    total = sum((polygon_area2(pc.polygon) for pc in pieces), Fraction(0))
    if total != size * size:
        raise InvariantViolation(f"puzzle area {total / 2} != {size * size / 2}")
    boxes = []
    for pc in pieces:
        xs = [x[0] for x in pc.polygon]
        ys = [x[1] for x in pc.polygon]
        boxes.append((min(xs), max(xs), min(ys), max(ys)))
    for i in range(len(pieces)):
        bi = boxes[i]
        for j in range(i + 1, len(pieces)):
            bj = boxes[j]
            if bi[1] <= bj[0] or bj[1] <= bi[0] or bi[3] <= bj[2] or bj[3] <= bi[2]:
                continue
            if not _separated(pieces[i].polygon, pieces[j].polygon):
                raise InvariantViolation(f"puzzle pieces {i} and {j} overlap")


def _subdivide(sides, pieces) -> List[Tuple[Point, Point, int]]:
    on_line: Dict[Tuple[int, Fraction], List[Point]] = {}
    for x in {x for pc in pieces for x in pc.polygon}:
        for c in (0, 1, 2):
            on_line.setdefault(_line_key(x, c), []).append(x)
    arcs = []
    for a, b in sides:
        k, L = hg.direction_of(hg.sub(b, a))
        cuts = [(Fraction(0), a), (L, b)]
        for x in on_line.get(_line_key(a, k), ()):
            d = hg.direction_of(hg.sub(x, a))
            if d and d[0] == k and d[1] < L:
                cuts.append((d[1], x))
        cuts.sort()
        for (_, u), (_, v) in zip(cuts, cuts[1:]):
            arcs.append((u, v, k))
    arcs.sort()
    return arcs


@dataclass(frozen=True)
class GentleCycle:
    arcs: Tuple[Tuple[Point, Point, int], ...]

    def to_json(self) -> dict:
        return {
            "gentle_cycle": [
                {"from": [hg.fmt_rat(x) for x in u], "to": [hg.fmt_rat(x) for x in v], "dir": k}
                for u, v, k in self.arcs
            ]
        }


def find_gentle_cycle(arcs) -> Optional[GentleCycle]:
    by_tail: Dict[Point, List[int]] = {}
    for i, (u, v, k) in enumerate(arcs):
        by_tail.setdefault(u, []).append(i)
    succ = []
    for u, v, k in arcs:
        succ.append([j for j in by_tail.get(v, []) if (arcs[j][2] - k) % 6 in (0, 1, 5)])
    color = [0] * len(arcs)
    for s in range(len(arcs)):
        if color[s]:
            continue
        stack = [(s, 0)]
        path = [s]
        color[s] = 1
        while stack:
            node, i = stack[-1]
            if i < len(succ[node]):
                stack[-1] = (node, i + 1)
                nxt = succ[node][i]
                if color[nxt] == 1:
                    cyc = path[path.index(nxt):]
                    return GentleCycle(tuple(arcs[c] for c in cyc))
                if color[nxt] == 0:
                    color[nxt] = 1
                    stack.append((nxt, 0))
                    path.append(nxt)
            else:
                color[node] = 2
                stack.pop()
                path.pop()
    return None


@lru_cache(maxsize=256)
def is_rigid(m: Measure):
    """True if rigid, otherwise a GentleCycle witness."""
    if m.is_zero():
        return True
    cyc = find_gentle_cycle(build_puzzle(m).arcs)
    return True if cyc is None else cyc


# -- duality -------------------------------------------------------------------


def _ray_j(k: int, out_variant: str) -> int:
    j, sign = hg.DIR_TO_W[k]
    want = 1 if out_variant == M else -1
    if sign != want:
        j, sign = hg.DIR_TO_W[(k + 3) % 6]
    return j


def dual(m: Measure) -> Measure:
    validate(m)
    omega = weight(m)
    if omega == 0:
        raise ValueError("the dual of the zero measure is undefined")
    arr = build_arrangement(m)
    hive = build_hive(m, arr)
    v = m.variant
    out_variant = MSTAR if v == M else M
    offsets = face_offsets(m, hive)
    segs, rays = [], []
    for eid, g in enumerate(arr.edges):
        h = 2 * eid
        if arr.face_of[h] < 0:
            h ^= 1
        P, Q = arr.he_points(h)
        length = hg.length(P, Q)
        tF = offsets[arr.face_of[h]]
        if arr.face_of[h ^ 1] >= 0:
            tG = offsets[arr.face_of[h ^ 1]]
        else:
            tG = tau(hive.exterior(h), v)
        if g.measure_edge is not None:
            _check_jump(arr.hdir[h], tF, tG, g.density, v)
            segs.append((tF, tG, length))
        if g.side is not None:
            k = hg.rotate(hg.SIDE_DIR[g.side], _turn(v))
            rays.append((tG, _ray_j(k, out_variant), length, g.side))

    base = {}
    for b, j, d, side in rays:
        base.setdefault(side, set()).add(b[1] if side == 3 else b[0] if side == 1 else b[0] - b[1])
    if any(len(s) != 1 for s in base.values()) or set(base) != {1, 2, 3}:
        raise InvariantViolation("dual ray bases are not aligned with a triangle")
    shift = (omega - base[1].pop(), -base[3].pop())
    if base[2].pop() + shift[0] - shift[1] != 0:
        raise InvariantViolation("dual ray bases do not fit a triangle of the weight's size")
    segs = [(hg.add(a, shift), hg.add(b, shift), d) for a, b, d in segs]
    rays = [(hg.add(b, shift), j, d) for b, j, d, _ in rays]
    out = from_segments(out_variant, omega, segs, rays)
    validate(out)
    return out
