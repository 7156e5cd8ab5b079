"""Typed trees, their immersions and the measures they carry."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import hexgeom as hg
from .hexgeom import Point
from .measure import (
    M,
    Falsification,
    InvalidMeasure,
    Measure,
    attachments,
    equal,
    exit_events,
    from_segments,
    validate,
    weight,
)

W_DIR = {1: hg.DIRS[0], 2: hg.DIRS[2], 3: hg.DIRS[4]}


@dataclass(frozen=True)
class TreeEdge:
    u: int
    v: int
    type: int


@dataclass(frozen=True)
class Leaf:
    branch: int
    type: int


@dataclass
class TypedTree:
    branches: int
    edges: List[TreeEdge]
    leaves: List[Leaf]

    def ports(self, b: int) -> List[Tuple[str, int, int]]:
        """(kind, index, type) of the three germs at branch b."""
        out = [("e", i, e.type) for i, e in enumerate(self.edges) if b in (e.u, e.v)]
        out += [("l", i, lf.type) for i, lf in enumerate(self.leaves) if lf.branch == b]
        return out

    def check(self) -> None:
        if self.branches < 1:
            raise ValueError("a typed tree needs a branch point")
        if len(self.edges) != self.branches - 1:
            raise ValueError("not a tree: wrong number of internal edges")
        for b in range(self.branches):
            ps = self.ports(b)
            if len(ps) != 3 or sorted(t for _, _, t in ps) != [1, 2, 3]:
                raise ValueError(f"types around branch {b} are not 1, 2, 3")
        seen = {0}
        stack = [0]
        while stack:
            x = stack.pop()
            for e in self.edges:
                for a, c in ((e.u, e.v), (e.v, e.u)):
                    if a == x and c not in seen:
                        seen.add(c)
                        stack.append(c)
        if len(seen) != self.branches:
            raise ValueError("not a tree: disconnected")


@dataclass
class Immersion:
    positions: List[Point]
    signs: List[int] = field(default_factory=list)  # per leaf: +1 for +w_j, -1 for -w_j

    def leaf_sign(self, i: int) -> int:
        return self.signs[i] if self.signs else 1


def check_immersion(t: TypedTree, f: Immersion) -> None:
    if len(f.positions) != t.branches:
        raise ValueError("immersion has the wrong number of branch images")
    for e in t.edges:
        d = hg.direction_of(hg.sub(f.positions[e.v], f.positions[e.u]))
        if d is None:
            raise ValueError(f"internal edge {e.u}-{e.v} has zero length or a wrong direction")
        if (d[0] - hg.W[e.type]) % 3:
            raise ValueError(f"internal edge {e.u}-{e.v} is not parallel to w{e.type}")


def _exit_point(p: Point, j: int, r: Fraction, sign: int = 1) -> Point:
    a, b = p
    if sign > 0:
        return {1: (r, b), 2: (a, a), 3: (a - b, Fraction(0))}[j]
    return {1: (b, b), 2: (a, Fraction(0)), 3: (r, b + r - a)}[j]


def tree_measure(t: TypedTree, f: Immersion, r=None, variant: str = M) -> Measure:
    """Overlay of all edge images; each segment carries its preimage count."""
    t.check()
    check_immersion(t, f)
    want = 1 if variant == M else -1
    if any(f.leaf_sign(i) != want for i in range(len(t.leaves))):
        raise ValueError("a leaf points the wrong way for this cone")
    if r is None:
        r = max(p[0] for p in f.positions) + 1
    r = hg.rat(r)
    segs, rays = [], []
    for e in t.edges:
        segs.append((f.positions[e.u], f.positions[e.v], 1))
    for lf in t.leaves:
        p = f.positions[lf.branch]
        q = _exit_point(p, lf.type, r, want)
        if not hg.in_triangle(p, r):
            raise InvalidMeasure(f"branch image {p} lies outside the triangle")
        if q != p:
            segs.append((p, q, 1))
        rays.append((q, lf.type, 1))
    m = from_segments(variant, r, segs, rays)
    validate(m)
    return m


def leaf_anchors(t: TypedTree, f: Immersion, r) -> Dict[int, Point]:
    """Boundary crossing point of each leaf."""
    r = hg.rat(r)
    return {
        i: _exit_point(f.positions[lf.branch], lf.type, r, f.leaf_sign(i)) for i, lf in enumerate(t.leaves)
    }


class AnchorError(ValueError):
    def __init__(self, branch: int, msg: str):
        self.branch = branch
        super().__init__(f"branch {branch}: {msg}")


def _contract(t: TypedTree, lines: Dict[int, Tuple[Point, int]], keep: Optional[int] = None):
    """Place branch points by repeatedly collapsing cherries.

    ``lines`` maps each leaf to a point on its image line and its type.  Leaf
    ``keep`` (if given) is never used to place a branch; the branch carrying it
    is placed last from its other two germs.
    """
    pos: Dict[int, Point] = {}
    # germs per branch: leaf lines, or internal edges to unplaced neighbours
    germs: Dict[int, Dict[Tuple[str, int], int]] = {b: {} for b in range(t.branches)}
    line_of: Dict[Tuple[str, int], Tuple[Point, int]] = {}
    for i, lf in enumerate(t.leaves):
        germs[lf.branch][("l", i)] = lf.type
        line_of[("l", i)] = lines[i]
    for i, e in enumerate(t.edges):
        germs[e.u][("e", i)] = e.type
        germs[e.v][("e", i)] = e.type
    keep_branch = t.leaves[keep].branch if keep is not None else None
    remaining = set(range(t.branches))
    while remaining:
        cand = None
        for b in sorted(remaining):
            known = [g for g in germs[b] if g in line_of and g != ("l", keep)]
            if len(known) >= 2 and (b != keep_branch or len(remaining) == 1):
                cand = (b, known)
                break
        if cand is None:
            raise AnchorError(min(remaining), "no branch with two determined germs")
        b, known = cand
        (p1, k1), (p2, k2) = line_of[known[0]], line_of[known[1]]
        x = hg.intersect_lines(p1, hg.W[k1], p2, hg.W[k2])
        if x is None:
            raise AnchorError(b, "two germs of the same type")
        for g in known[2:]:
            p3, k3 = line_of[g]
            if not hg.on_line(x, p3, hg.W[k3]):
                raise AnchorError(b, "the third anchor line misses the intersection")
        pos[b] = x
        remaining.discard(b)
        for g, typ in germs[b].items():
            if g[0] == "e" and g not in line_of:
                line_of[g] = (x, typ)
    return [pos[b] for b in range(t.branches)]


def solve_immersion(t: TypedTree, anchors: Dict[int, Point], signs: Sequence[int] = ()) -> Immersion:
    """Unique branch placement whose leaf lines pass through the anchors."""
    t.check()
    lines = {i: (anchors[i], lf.type) for i, lf in enumerate(t.leaves)}
    pos = _contract(t, lines)
    f = Immersion(pos, list(signs))
    check_immersion(t, f)
    return f


def perturb_immersion(
    t: TypedTree,
    f: Immersion,
    anchors: Dict[int, Point],
    targets: Dict[int, Point],
    eps,
    s0: int = 0,
) -> Tuple[Immersion, Dict[int, Point]]:
    """Move every anchor but s0's to its target, keeping the tree within eps of f.

    Targets must lie within eps/2^b of the current anchors.  Returns the new
    immersion and the new anchors (s0's anchor follows its branch point).
    """
    eps = hg.rat(eps)
    delta = eps / 2 ** t.branches
    for i, p in targets.items():
        if i == s0:
            continue
        if hg.dist2(p, anchors[i]) >= delta * delta:
            raise ValueError(f"target for leaf {i} is not within {delta} of its anchor")
    lines = {i: ((targets[i] if i != s0 else anchors[i]), lf.type) for i, lf in enumerate(t.leaves)}
    pos = _contract(t, lines, keep=s0)
    g = Immersion(pos, list(f.signs))
    check_immersion(t, g)
    b0 = t.leaves[s0].branch
    new_anchors = dict(targets)
    new_anchors[s0] = hg.add(anchors[s0], hg.sub(pos[b0], f.positions[b0]))
    for b in range(t.branches):
        if hg.dist2(pos[b], f.positions[b]) >= eps * eps:
            raise Falsification(f"branch {b} moved by eps or more")
    for i in new_anchors:
        if hg.dist2(new_anchors[i], anchors[i]) >= eps * eps:
            raise Falsification(f"anchor of leaf {i} moved by eps or more")
    return g, new_anchors


def perturb_tree_measure(
    m: Measure,
    xs: Sequence,
    r_new,
    tree: Optional[Tuple[TypedTree, Immersion]] = None,
    eps=None,
) -> Measure:
    """Tree measure with the same exit densities at new attachment coordinates.

    ``xs`` lists the new coordinates in attachment order.
    """
    xs = [hg.rat(x) for x in xs]
    r_new = hg.rat(r_new)
    atts = attachments(m)
    if len(xs) != len(atts):
        raise ValueError(f"expected {len(atts)} coordinates, got {len(xs)}")
    lhs = sum((a.density * x for a, x in zip(atts, xs)), Fraction(0))
    if lhs != weight(m) * r_new:
        raise ValueError(f"trace constraint fails: {lhs} != {weight(m) * r_new}")
    if tree is None:
        tree = extremal_to_tree(m)
    t, f = tree
    loc = {a.location: hg.point_on_side(a.side, x, r_new) for a, x in zip(atts, xs)}
    out = move_tree(t, f, m.r, loc, r_new, m.variant, eps)
    got = [(a.location, a.density) for a in attachments(out)]
    want = sorted(
        ((loc[a.location], a.density) for a in atts),
        key=lambda z: hg.side_coordinate(z[0], r_new),
    )
    if got != want:
        raise Falsification("perturbed tree measure has different exit data")
    return out


def move_tree(
    t: TypedTree,
    f: Immersion,
    r,
    moved: Dict[Point, Point],
    r_new,
    variant: str = M,
    eps=None,
) -> Measure:
    """Re-immerse t so its leaves cross the boundary at the moved points.

    Leaves crossing at a corner follow that corner.  Leaf 0 is not used to
    place branches; it must land on its target by itself.
    """
    r, r_new = hg.rat(r), hg.rat(r_new)
    old = leaf_anchors(t, f, r)
    targets = {}
    for i, p in old.items():
        if p in moved:
            targets[i] = moved[p]
            continue
        sc = hg.side_coordinate(p, r)
        if sc is None or sc[1] != 0:
            raise ValueError(f"no target given for the leaf crossing at {p}")
        targets[i] = hg.point_on_side(sc[0], Fraction(0), r_new)
    if eps is not None:
        g, _ = perturb_immersion(t, f, old, targets, eps, s0=0)
    else:
        lines = {i: (targets[i] if i else old[i], lf.type) for i, lf in enumerate(t.leaves)}
        g = Immersion(_contract(t, lines, keep=0), list(f.signs))
    check_immersion(t, g)
    if leaf_anchors(t, g, r_new)[0] != targets[0]:
        raise Falsification("the distinguished leaf missed its target")
    return tree_measure(t, g, r_new, variant)


# -- extraction ----------------------------------------------------------------


def extremal_to_tree(m: Measure, limit: int = 10000) -> Tuple[TypedTree, Immersion]:
    """Unfold the descendance paths of an extremal measure into a typed tree."""
    from .descend import descendance_graph, root_edges

    g = descendance_graph(m)
    roots = root_edges(g)
    if len(roots) != 1:
        raise Falsification(f"expected one root class, found {len(roots)}")
    nedges = len(m.edges)
    root = roots[0][0]
    if root >= nedges:
        raise Falsification("root class starts on a ray")
    succ: Dict[Tuple[int, int], List[int]] = {}
    for a, b, vid in g.arcs:
        succ.setdefault((a, vid), []).append(b)

    def ends(node: int) -> Tuple[int, Optional[int]]:
        if node < nedges:
            e = m.edges[node]
            return e.u, e.v
        return m.rays[node - nedges].base, None

    def direction(node: int, frm: int) -> int:
        if node >= nedges:
            return m.ray_dir(m.rays[node - nedges])
        u, v = ends(node)
        other = v if frm == u else u
        return hg.direction_of(hg.sub(m.vertices[other], m.vertices[frm]))[0]

    positions: List[Point] = []
    tedges: List[TreeEdge] = []
    leaves: List[Leaf] = []
    steps = 0

    def walk(node: int, frm: int):
        """Follow a tree edge entering ``node`` at vertex ``frm``; returns ("b", id) or ("l", type)."""
        nonlocal steps
        while True:
            steps += 1
            if steps > limit:
                raise Falsification("descendance unfolding does not terminate")
            k = direction(node, frm)
            typ = hg.DIR_TO_W[k][0]
            if node >= nedges:
                return ("l", typ, 1 if hg.DIR_TO_W[k][1] > 0 else -1)
            u, v = ends(node)
            at = v if frm == u else u
            kids = succ.get((node, at), [])
            kin = (k + 3) % 6
            turns = [c for c in kids if direction(c, at) in ((kin + 2) % 6, (kin + 4) % 6)]
            straight = [c for c in kids if direction(c, at) == k]
            if turns:
                if len(turns) != 2:
                    raise Falsification(f"unfolding meets a half branch at {m.vertices[at]}")
                bid = len(positions)
                positions.append(m.vertices[at])
                for c in sorted(turns, key=lambda c: direction(c, at)):
                    res = walk(c, at)
                    _attach(bid, res, hg.DIR_TO_W[direction(c, at)][0])
                return ("b", bid, typ)
            if len(straight) != 1:
                raise Falsification(f"unfolding stops at {m.vertices[at]}")
            node, frm = straight[0], at

    def _attach(bid, res, typ):
        if res[0] == "b":
            tedges.append(TreeEdge(bid, res[1], typ))
        else:
            leaves.append(Leaf(bid, res[1]))
            signs.append(res[2])

    signs: List[int] = []
    u, v = ends(root)
    left = walk(root, u)
    right = walk(root, v)
    typ = hg.DIR_TO_W[direction(root, u)][0]
    if left[0] == "b" and right[0] == "b":
        tedges.append(TreeEdge(left[1], right[1], typ))
    elif left[0] == "b":
        _attach(left[1], right, typ)
    elif right[0] == "b":
        _attach(right[1], left, typ)
    else:
        raise Falsification("unfolding produced a tree without branch points")
    t = TypedTree(len(positions), tedges, leaves)
    f = Immersion(positions, signs)
    t.check()
    if not equal(tree_measure(t, f, m.r, m.variant), m):
        raise Falsification("unfolded tree does not reproduce the component")
    return t, f


# -- generation ----------------------------------------------------------------


def allowed_branch_count(n: int) -> int:
    """Largest admissible count <= n; trees in the cone have 1 mod 3 branches."""
    if n < 1:
        raise ValueError("branch count must be at least 1")
    return n - (n - 1) % 3


def gen_tree(seed: int, branch_count: int) -> Tuple[TypedTree, Immersion, Fraction]:
    rng = random.Random(seed)
    b = allowed_branch_count(branch_count)
    sign = [1]
    slots = [3]
    adj: Dict[int, List[int]] = {0: []}
    for _ in range((b - 1) // 3):
        host = rng.choice([i for i in range(len(sign)) if sign[i] > 0 and slots[i] > 0])
        mid = len(sign)
        sign.append(-1)
        slots.append(0)
        slots[host] -= 1
        adj[mid] = [host]
        adj[host].append(mid)
        for _ in range(2):
            leafy = len(sign)
            sign.append(1)
            slots.append(2)
            adj[leafy] = [mid]
            adj[mid].append(leafy)
    # types: propagate from branch 0
    edge_type: Dict[frozenset, int] = {}
    leaves: List[Leaf] = []
    order = [0]
    seen = {0}
    for x in order:
        used = {edge_type[frozenset((x, y))] for y in adj[x] if frozenset((x, y)) in edge_type}
        free = [j for j in (1, 2, 3) if j not in used]
        rng.shuffle(free)
        for y in adj[x]:
            key = frozenset((x, y))
            if key not in edge_type:
                edge_type[key] = free.pop()
            if y not in seen:
                seen.add(y)
                order.append(y)
        for j in free:
            leaves.append(Leaf(x, j))
    pos: Dict[int, Point] = {0: (Fraction(0), Fraction(0))}
    for x in order:
        for y in adj[x]:
            if y in pos:
                continue
            den = rng.choice((1, 2, 3, 4))
            length = Fraction(rng.randint(den, 10 * den), den)
            j = edge_type[frozenset((x, y))]
            pos[y] = hg.add(pos[x], hg.mul(W_DIR[j], length * sign[x]))
    margin = Fraction(rng.randint(1, 4), 2)
    vals = list(pos.values())
    sb = margin - min(p[1] for p in vals)
    sa = margin - min(p[0] - p[1] for p in vals) + sb
    positions = [hg.add(pos[i], (sa, sb)) for i in range(b)]
    edges = sorted(
        (TreeEdge(min(k), max(k), v) for k, v in edge_type.items()),
        key=lambda e: (e.u, e.v),
    )
    t = TypedTree(b, edges, leaves)
    f = Immersion(positions, [1] * len(leaves))
    r = max(p[0] for p in positions) + margin
    return t, f, r


def gen_tree_measure(seed: int, branch_count: int) -> Measure:
    t, f, r = gen_tree(seed, branch_count)
    return tree_measure(t, f, r)


# -- files -------------------------------------------------------------------


def tree_to_json(t: TypedTree, f: Immersion, r=None) -> str:
    data = {
        "branches": t.branches,
        "edges": [{"u": e.u, "v": e.v, "type": e.type} for e in t.edges],
        "leaves": [{"branch": lf.branch, "type": lf.type, "sign": f.leaf_sign(i)} for i, lf in enumerate(t.leaves)],
        "immersion": [[hg.fmt_rat(p[0]), hg.fmt_rat(p[1])] for p in f.positions],
    }
    if r is not None:
        data["r"] = hg.fmt_rat(hg.rat(r))
    return json.dumps(data, indent=2) + "\n"


def tree_from_json(text: str):
    data = json.loads(text)
    t = TypedTree(
        int(data["branches"]),
        [TreeEdge(int(e["u"]), int(e["v"]), int(e["type"])) for e in data["edges"]],
        [Leaf(int(lf["branch"]), int(lf["type"])) for lf in data["leaves"]],
    )
    f = Immersion(
        [hg.pt(a, b) for a, b in data["immersion"]],
        [int(lf.get("sign", 1)) for lf in data["leaves"]],
    )
    t.check()
    check_immersion(t, f)
    r = hg.rat(data["r"]) if "r" in data else None
    return t, f, r
