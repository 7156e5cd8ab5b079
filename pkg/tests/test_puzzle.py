from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hexmeasure import hexgeom as hg
from hexmeasure.fixtures import tripod
from hexmeasure.measure import MSTAR, add, dumps, equal, from_segments, scale, weight, M
from hexmeasure.puzzle import GentleCycle, build_puzzle, dual, face_offsets, find_gentle_cycle, is_rigid, polygon_area2

half_branch = st.tuples(st.integers(1, 8), st.integers(1, 8)).filter(lambda ab: ab[1] < ab[0]).map(
    lambda ab: (Fraction(ab[0], 2), Fraction(ab[1], 2))
)


def two_tripods(p, q, c=1):
    r = max(p[0], q[0]) + 1
    return add(tripod(p, r), tripod(q, r, c))


def edge_multiset(m):
    return Counter((m.edge_length(e), e.density) for e in m.edges)


def test_offsets(T3):
    off = face_offsets(T3)
    vals = sorted(off.values())
    assert (0, 0) in vals and len(vals) == 3
    for i in range(3):
        for j in range(i + 1, 3):
            assert hg.norm2(hg.sub(vals[i], vals[j])) == 1
    doubled = face_offsets(scale(T3, 2))
    assert sorted(doubled.values()) == sorted(hg.mul(v, 2) for v in vals)
    empty = face_offsets(from_segments(M, 2, [], []))
    assert set(empty.values()) == {(0, 0)}


def test_t3_puzzle(T3):
    pz = build_puzzle(T3)
    assert (pz.count("white"), pz.count("parallelogram"), pz.count("branch")) == (3, 3, 1)
    assert pz.size == 4
    assert sum(polygon_area2(p.polygon) for p in pz.pieces) == pz.size ** 2
    tri = [p for p in pz.pieces if p.kind == "branch"][0]
    assert polygon_area2(tri.polygon) == 1


def test_empty_puzzle():
    pz = build_puzzle(from_segments(M, 2, [], []))
    assert pz.count("white") == 1 and len(pz.pieces) == 1


def test_c5_puzzle(C5):
    pz = build_puzzle(C5)
    # six support edges give six parallelograms; five faces give five white pieces
    assert (pz.count("white"), pz.count("parallelogram"), pz.count("branch")) == (5, 6, 2)
    assert pz.size == 7


def test_rigidity(T3, C5, HF):
    assert is_rigid(T3) is True
    assert is_rigid(C5) is True
    for m in HF:
        w = is_rigid(m)
        assert isinstance(w, GentleCycle)
        arcs = w.arcs
        for (u, v, k), (u2, v2, k2) in zip(arcs, arcs[1:] + arcs[:1]):
            assert v == u2 and (k2 - k) % 6 in (0, 1, 5)
            assert hg.direction_of(hg.sub(v, u))[0] == k


def test_gentle_cycle_search_toy():
    p = [hg.pt(0, 0), hg.pt(1, 0), hg.pt(1, 1)]
    # a triangle walked with 120 degree turns is not gentle
    sharp = [(p[0], p[1], 0), (p[1], p[2], 2), (p[2], p[0], 4)]
    assert find_gentle_cycle(sharp) is None
    hexagon = [hg.DIRS[k] for k in range(6)]
    pts = [(Fraction(0), Fraction(0))]
    for d in hexagon:
        pts.append(hg.add(pts[-1], d))
    arcs = [(pts[i], pts[i + 1], i) for i in range(6)]
    assert find_gentle_cycle(arcs) is not None


def test_dual_t3(T3):
    d = dual(T3)
    assert d.variant == MSTAR
    assert weight(d) == 3 and d.r == 1
    assert len(d.edges) == 3 and all(e.density == 1 and d.edge_length(e) == 1 for e in d.edges)
    per_vertex = {}
    for ray in d.rays:
        per_vertex.setdefault(ray.base, []).append(ray.density)
    assert len(per_vertex) == 3
    assert all(sorted(v) == [1, 2] for v in per_vertex.values())
    assert equal(dual(d), T3)
    assert dumps(dual(d)) == dumps(T3)


def test_dual_scaling(T3):
    d2 = dual(scale(T3, 2))
    assert all(d2.edge_length(e) == 2 and e.density == 1 for e in d2.edges)


def test_dual_of_zero_rejected():
    with pytest.raises(ValueError):
        dual(from_segments(M, 2, [], []))


def test_c5_dual(C5):
    d = dual(C5)
    assert dumps(dual(d)) == dumps(C5)
    pz = build_puzzle(d)
    assert (pz.count("white"), pz.count("parallelogram"), pz.count("branch")) == (2, 6, 5)


@settings(max_examples=25)
@given(half_branch, half_branch, st.integers(1, 3))
def test_duality_properties(p, q, c):
    m = two_tripods(p, q, c)
    d = dual(m)
    assert weight(d) == m.r and d.r == weight(m)
    assert edge_multiset(d) == Counter({(b, a): n for (a, b), n in edge_multiset(m).items()})
    assert dumps(dual(d)) == dumps(m)
    assert (is_rigid(m) is True) == (is_rigid(d) is True)
    pz = build_puzzle(m)
    # branch polygons of m are the white pieces of the dual
    assert pz.count("branch") == build_puzzle(d).count("white")
    assert sum(polygon_area2(x.polygon) for x in pz.pieces) == pz.size ** 2
    assert pz.size == m.r + weight(m)
