"""Homology of measures, the map Phi, perturbation and the main identity."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from . import hexgeom as hg
from . import linalg
from .arrangement import Arrangement, build_arrangement
from .descend import Decomposition, decompose, exit_density_matrix
from .hexgeom import Point
from .measure import (
    Falsification,
    Measure,
    add,
    att,
    attachments,
    equal,
    exit_events,
    scale,
    validate,
    weight,
)
from .puzzle import dual, is_rigid
from .treeimm import extremal_to_tree, move_tree


class NotRigid(ValueError):
    pass


# -- homology ------------------------------------------------------------------


@dataclass
class HomologyMap:
    vertex: Dict[Point, Point]
    strict: bool

    def __call__(self, p: Point) -> Point:
        return self.vertex[p]


def _rays_at(m: Measure) -> Dict[Point, Dict[int, Fraction]]:
    out: Dict[Point, Dict[int, Fraction]] = {}
    for ray in m.rays:
        out.setdefault(m.vertices[ray.base], {})[ray.j] = ray.density
    return out


def is_homologous(m1: Measure, m2: Measure, strict: bool = False) -> Optional[HomologyMap]:
    """Vertex correspondence found by walking both subdivisions in step."""
    validate(m1)
    validate(m2)
    if m1.variant != m2.variant:
        return None
    a1, a2 = Arrangement(m1), Arrangement(m2)
    if (len(a1.points), len(a1.edges), len(a1.faces)) != (len(a2.points), len(a2.edges), len(a2.faces)):
        return None

    def start(a: Arrangement) -> int:
        return a.out[a.pid[(Fraction(0), Fraction(0))]][0]

    hmap = {start(a1): start(a2)}
    vmap: Dict[int, int] = {}
    stack = [start(a1)]
    while stack:
        h = stack.pop()
        h2 = hmap[h]
        if a1.hdir[h] != a2.hdir[h2]:
            return None
        g1, g2 = a1.he_edge(h), a2.he_edge(h2)
        if (g1.measure_edge is None) != (g2.measure_edge is None) or (g1.side is None) != (g2.side is None):
            return None
        if strict and g1.density != g2.density:
            return None
        o1, o2 = a1.origin[h], a2.origin[h2]
        if vmap.setdefault(o1, o2) != o2:
            return None
        for x1, x2 in ((h ^ 1, h2 ^ 1), (a1.next[h], a2.next[h2])):
            if x1 in hmap:
                if hmap[x1] != x2:
                    return None
            else:
                hmap[x1] = x2
                stack.append(x1)
    if len(hmap) != len(a1.origin) or len(set(vmap.values())) != len(vmap):
        return None
    vertex = {a1.points[i]: a2.points[j] for i, j in vmap.items()}
    r1, r2 = _rays_at(m1), _rays_at(m2)
    if len(r1) != len(r2):
        return None
    for p, rays in r1.items():
        q = vertex.get(p)
        other = r2.get(q)
        if other is None or set(other) != set(rays):
            return None
        if strict and other != rays:
            return None
    return HomologyMap(vertex, strict)


def attachment_data(m: Measure) -> Tuple[Fraction, List[Fraction]]:
    return m.r, [a.x for a in attachments(m)]


def transported_data(m: Measure, other: Measure, phi: HomologyMap) -> Tuple[Fraction, List[Fraction]]:
    """(r', x') of ``other`` read at the images of m's attachments."""
    xs = []
    for a in attachments(m):
        xs.append(hg.coordinate_on_side(phi(a.location), other.r, a.side))
    return other.r, xs


# -- Phi -------------------------------------------------------------------------


@dataclass
class PhiMap:
    base: Measure
    dual_decomposition: Decomposition
    gamma0: List[Fraction]
    value0: List[Fraction]
    matrix: List[List[Fraction]]  # (q+1) x p

    @property
    def p(self) -> int:
        return len(self.gamma0)

    def evaluate(self, gamma: Sequence[Fraction]) -> List[Fraction]:
        return phi_value(self.base, self.dual_decomposition, gamma)


def _combine(dec: Decomposition, gamma: Sequence[Fraction]) -> Measure:
    total = None
    for c, g in zip(dec.components, gamma):
        if g <= 0:
            raise ValueError("Phi is defined on positive coefficients only")
        term = scale(c.measure, g)
        total = term if total is None else add(total, term)
    return total


def phi_value(m: Measure, dec: Decomposition, gamma: Sequence[Fraction]) -> List[Fraction]:
    other = dual(_combine(dec, gamma))
    phi = is_homologous(m, other)
    if phi is None:
        raise Falsification(f"dual of the combination {list(map(str, gamma))} is not homologous to the base")
    r, xs = transported_data(m, other, phi)
    return [r] + xs


def phi_build(m: Measure) -> PhiMap:
    validate(m)
    if weight(m) == 0:
        raise ValueError("Phi needs a nonzero measure")
    if is_rigid(m) is not True:
        raise NotRigid("Phi is only defined for rigid measures")
    dec = decompose(dual(m))
    gamma0 = [c.delta for c in dec.components]
    value0 = phi_value(m, dec, gamma0)
    r, xs = attachment_data(m)
    if value0 != [r] + xs:
        raise Falsification("Phi at the base point does not return the measure's own data")
    cols = []
    for j in range(len(gamma0)):
        g = list(gamma0)
        g[j] += 1
        v = phi_value(m, dec, g)
        cols.append([a - b for a, b in zip(v, value0)])
    return PhiMap(m, dec, gamma0, value0, linalg.transpose(cols))


def trace_system(m: Measure, dec: Optional[Decomposition] = None):
    """Rows (-omega(m_j), alpha^(j)_1..q): the linear equations cutting out V."""
    if dec is None:
        dec = decompose(m)
    mat, _ = exit_density_matrix(dec)
    rows = []
    for j, c in enumerate(dec.components):
        rows.append([-weight(c.measure)] + [row[j] for row in mat])
    return rows


def phi_checks(P: PhiMap, pairs: int = 6) -> dict:
    m = P.base
    failures = []
    cols = linalg.transpose(P.matrix) if P.matrix and P.matrix[0] else []
    n = 0
    for i in range(P.p):
        for j in range(i + 1, P.p):
            if n >= pairs:
                break
            n += 1
            g = list(P.gamma0)
            g[i] += 1
            g[j] += 1
            got = P.evaluate(g)
            want = [v + a + b for v, a, b in zip(P.value0, cols[i], cols[j])]
            if got != want:
                failures.append(f"linearity fails for columns {i},{j}")
    rk = linalg.rank(P.matrix) if cols else 0
    if rk != P.p:
        failures.append(f"rank {rk} != p = {P.p}")
    dec = decompose(m)
    expected = att(m) + 1 - dec.k
    if rk != expected:
        failures.append(f"rank {rk} != att + 1 - ext = {expected}")
    rows = trace_system(m, dec)
    for j, col in enumerate(cols):
        for row in rows:
            if sum((a * b for a, b in zip(row, col)), Fraction(0)) != 0:
                failures.append(f"column {j} leaves the trace space")
                break
    return {
        "p": P.p,
        "rank": rk,
        "att": att(m),
        "ext": dec.k,
        "linearity_pairs": n,
        "ok": not failures,
        "failures": failures,
    }


# -- main identity -------------------------------------------------------------


def check_main_theorem(m: Measure, with_phi: bool = False) -> dict:
    validate(m)
    if weight(m) == 0:
        raise ValueError("the identity concerns nonzero measures")
    if is_rigid(m) is not True:
        raise NotRigid("the identity concerns rigid measures")
    e = decompose(m).k
    d = dual(m)
    e_star = decompose(d).k
    q = att(m)
    report = {"ext": e, "ext_dual": e_star, "att": q, "holds": e + e_star == q + 1}
    if with_phi:
        P = phi_build(m)
        chk = phi_checks(P)
        report["phi"] = chk
        if chk["rank"] != e_star:
            report["holds"] = False
    if not report["holds"]:
        raise Falsification(f"ext + ext* = {e} + {e_star} but att + 1 = {q + 1}")
    return report


# -- perturbation ----------------------------------------------------------------


def _sqrt_floor(x: Fraction, bits: int = 24) -> Fraction:
    """Rational lower bound for sqrt(x)."""
    import math

    d = 1 << bits
    return Fraction(math.isqrt(x.numerator * d * d // x.denominator), d)


def perturbation_radius(m: Measure, dec: Optional[Decomposition] = None, trees=None) -> Tuple[Fraction, Fraction]:
    """(eps, delta) for moving the attachment data of a rigid measure.

    eps is a fifth of the smallest distance between vertices (corners
    included); delta halves the smaller of the tree bound eps/2^b and a
    quarter of the shortest boundary segment.  Square roots are rounded down.
    """
    if dec is None:
        dec = decompose(m)
    if trees is None:
        trees = [extremal_to_tree(c.measure) for c in dec.components]
    pts = sorted(set(m.vertices) | set(hg.corners(m.r).values()))
    d2 = min(hg.dist2(p, q) for i, p in enumerate(pts) for q in pts[i + 1:])
    eps = _sqrt_floor(d2) / 5
    bmax = max(t.branches for t, _ in trees)
    gap = None
    for j in (3, 1, 2):
        xs = sorted(hg.coordinate_on_side(p, m.r, j) for p in pts if j in hg.sides_of(p, m.r))
        for a, b in zip(xs, xs[1:]):
            gap = b - a if gap is None else min(gap, b - a)
    delta0 = min(eps / 2 ** bmax, gap / 4)
    return eps, delta0 / 2


def _displacement_ok(m: Measure, r_new: Fraction, xs: Sequence[Fraction], delta: Fraction) -> bool:
    if abs(r_new - m.r) >= delta:
        return False
    for a, x in zip(attachments(m), xs):
        if hg.dist2(hg.point_on_side(a.side, x, r_new), a.location) >= delta * delta:
            return False
    return True


def perturb_measure(m: Measure, r_new, xs: Sequence, enforce_delta: bool = True) -> Measure:
    """Strictly homologous measure with attachment data (r_new, xs)."""
    r_new = hg.rat(r_new)
    xs = [hg.rat(x) for x in xs]
    atts = attachments(m)
    if len(xs) != len(atts):
        raise ValueError(f"expected {len(atts)} coordinates, got {len(xs)}")
    if is_rigid(m) is not True:
        raise NotRigid("perturbation needs a rigid measure")
    dec = decompose(m)
    for row in trace_system(m, dec):
        if row[0] * r_new + sum((a * x for a, x in zip(row[1:], xs)), Fraction(0)) != 0:
            raise ValueError("targets violate a trace equation of an extremal component")
    trees = [extremal_to_tree(c.measure) for c in dec.components]
    eps, delta = perturbation_radius(m, dec, trees)
    if enforce_delta and not _displacement_ok(m, r_new, xs, delta):
        raise ValueError(f"targets move farther than the admissible radius {delta}")
    moved = {a.location: hg.point_on_side(a.side, x, r_new) for a, x in zip(atts, xs)}
    total = None
    for c, (t, f) in zip(dec.components, trees):
        part = move_tree(t, f, m.r, moved, r_new, m.variant, eps if enforce_delta else None)
        part = scale(part, c.delta)
        total = part if total is None else add(total, part)
    fail = Falsification if enforce_delta else ValueError
    if attachment_data(total) != (r_new, xs):
        raise fail("perturbed measure does not attach at the targets")
    if is_homologous(m, total, strict=True) is None:
        raise fail("perturbed measure is not strictly homologous to the input")
    return total


def random_targets(m: Measure, rng: random.Random, delta: Fraction, dec: Optional[Decomposition] = None):
    """Random point of the trace space within delta/2 of m's data."""
    rows = trace_system(m, dec)
    basis = linalg.nullspace(rows, 1 + len(attachments(m)))
    r, xs = attachment_data(m)
    base = [r] + xs
    if not basis:
        return r, xs
    v = [Fraction(0)] * len(base)
    for b in basis:
        c = Fraction(rng.randint(-96, 96), 97)
        v = [vi + c * bi for vi, bi in zip(v, b)]
    top = max(abs(x) for x in v)
    if top == 0:
        return r, xs
    t = delta / (6 * top) * Fraction(rng.randint(50, 100), 100)
    out = [bi + t * vi for bi, vi in zip(base, v)]
    return out[0], out[1:]


# -- corpus --------------------------------------------------------------------


@dataclass
class Instance:
    label: str
    measure: Measure
    trees: list = field(default_factory=list)  # (tree, immersion) per summand when generated
    kind: str = "tree"


def corpus_instances(seed: int, count: int, max_branches: int, sums: int = 0) -> List[Instance]:
    """Generated tree measures followed by rigid sums of two of them."""
    from .treeimm import gen_tree, tree_measure

    rng = random.Random(seed)
    out = []
    for i in range(count):
        s = rng.randrange(1 << 30)
        t, f, r = gen_tree(s, rng.randint(1, max_branches))
        out.append(Instance(f"tree-{seed}-{i}", tree_measure(t, f, r), [(t, f)]))
    made = attempts = 0
    while made < sums and attempts < 20 * sums:
        attempts += 1
        b1 = rng.randint(1, max_branches)
        b2 = rng.randint(1, max(1, max_branches - b1))
        (t1, f1, r1), (t2, f2, r2) = gen_tree(rng.randrange(1 << 30), b1), gen_tree(rng.randrange(1 << 30), b2)
        if t1.branches + t2.branches > max_branches:
            continue
        r = max(r1, r2)
        m = add(tree_measure(t1, f1, r), tree_measure(t2, f2, r))
        if is_rigid(m) is not True:
            continue
        out.append(Instance(f"sum-{seed}-{made}", m, [(t1, f1), (t2, f2)], "sum"))
        made += 1
    return out


CHECKS = (
    "validate", "weight", "trace", "involution", "dual_swap", "rigidity_transport",
    "decompose", "exit_rank", "theorem", "phi", "trees", "perturb",
)


def check_instance(inst: Instance, phi: bool = True, perturb: bool = False, seed: int = 0) -> dict:
    """Run every identity on one rigid instance; failures never raise."""
    from .measure import dumps, trace_check
    from .treeimm import extremal_to_tree, leaf_anchors, solve_immersion, tree_measure

    m = inst.measure
    res: Dict[str, Optional[bool]] = {}
    errors: Dict[str, str] = {}
    state: dict = {}

    def run(name, fn):
        try:
            ok = fn()
            res[name] = bool(ok)
            if not ok:
                errors[name] = "check returned false"
        except Exception as exc:  # falsification bundles record every failure
            res[name] = False
            errors[name] = f"{type(exc).__name__}: {exc}"

    def c_dual():
        d = state["dual"] = dual(m)
        return dumps(dual(d)) == dumps(m)

    def c_decompose():
        dec = state["dec"] = decompose(m)
        return all(
            e.density.denominator == 1 for c in dec.components for e in c.measure.edges
        ) and all(ray.density.denominator == 1 for c in dec.components for ray in c.measure.rays)

    def c_trees():
        for t, f in inst.trees:
            g = solve_immersion(t, leaf_anchors(t, f, m.r), f.signs)
            if g.positions != f.positions:
                return False
        for c in state["dec"].components:
            t, f = extremal_to_tree(c.measure)
            if not equal(tree_measure(t, f, c.measure.r, c.measure.variant), c.measure):
                return False
        return True

    def c_perturb():
        rng = random.Random(seed)
        eps, delta = perturbation_radius(m, state["dec"])
        r2, x2 = random_targets(m, rng, delta, state["dec"])
        out = perturb_measure(m, r2, x2)
        if attachment_data(out) != (r2, x2) or is_homologous(m, out, strict=True) is None:
            return False
        if is_rigid(out) is not True:
            return False
        r, xs = attachment_data(m)
        return dumps(perturb_measure(out, r, xs)) == dumps(m)

    run("validate", lambda: validate(m) is None)
    run("weight", lambda: weight(m) > 0)
    run("trace", lambda: trace_check(m)[2])
    run("involution", c_dual)
    run("dual_swap", lambda: weight(state["dual"]) == m.r and state["dual"].r == weight(m))
    run("rigidity_transport", lambda: (is_rigid(m) is True) == (is_rigid(state["dual"]) is True))
    run("decompose", c_decompose)
    run("exit_rank", lambda: exit_density_matrix(state["dec"])[1] == state["dec"].k)
    run("theorem", lambda: check_main_theorem(m)["holds"])
    if phi:
        run("phi", lambda: phi_checks(phi_build(m))["ok"])
    run("trees", c_trees)
    if perturb:
        run("perturb", c_perturb)
    return {"label": inst.label, "kind": inst.kind, "results": res, "errors": errors}


def run_corpus(
    seed: int,
    count: int,
    max_branches: int,
    sums: int = 0,
    phi: bool = True,
    perturb: int = 0,
    include_fixtures: bool = False,
) -> dict:
    """Generate a corpus and run every check; returns pass counts and falsification bundles."""
    from .measure import to_dict

    insts = corpus_instances(seed, count, max_branches, sums)
    totals = {name: [0, 0] for name in CHECKS}
    bundles = []
    for i, inst in enumerate(insts):
        rep = check_instance(inst, phi=phi, perturb=i < perturb, seed=seed * 7919 + i)
        for name, ok in rep["results"].items():
            totals[name][1] += 1
            totals[name][0] += bool(ok)
        for name, msg in rep["errors"].items():
            bundles.append({"label": inst.label, "check": name, "error": msg, "measure": to_dict(inst.measure)})
    cross = []
    if include_fixtures:
        from .fixtures import hf_pair

        for name, m in zip(("HF-a", "HF-b"), hf_pair()):
            a, b = is_rigid(m) is True, is_rigid(dual(m)) is True
            cross.append({"label": name, "rigid": a, "dual_rigid": b})
            totals["rigidity_transport"][1] += 1
            totals["rigidity_transport"][0] += a == b
            if a != b:
                bundles.append({"label": name, "check": "rigidity_transport", "error": "mismatch", "measure": to_dict(m)})
    return {
        "seed": seed,
        "instances": len(insts),
        "trees": sum(1 for x in insts if x.kind == "tree"),
        "sums": sum(1 for x in insts if x.kind == "sum"),
        "checks": {k: {"passed": v[0], "total": v[1]} for k, v in totals.items() if v[1]},
        "fixtures": cross,
        "falsifications": bundles,
    }
