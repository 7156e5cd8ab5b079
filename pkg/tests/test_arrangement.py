from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hexmeasure import hexgeom as hg
from hexmeasure.arrangement import (
    ConvexityError,
    HF_INCREMENTS,
    LatticeHive,
    boundary_from_increments,
    build_arrangement,
    build_hive,
    enumerate_hives,
    lattice_restriction,
    local_pieces,
    measure_from_hive,
    rhombi,
    second_difference,
)
from hexmeasure.fixtures import tripod
from hexmeasure.measure import M, add, exit_events, from_segments, scale

int_branch = st.tuples(st.integers(1, 5), st.integers(1, 5)).filter(lambda ab: ab[1] < ab[0])


def grid_sum(p, q):
    r = max(p[0], q[0]) + 1
    return add(tripod(p, r), tripod(q, r))


def test_face_counts(T3, C5):
    assert len(build_arrangement(T3).faces) == 3
    # the caterpillar has two branch points and five complementary regions
    assert len(build_arrangement(C5).faces) == 5
    assert len(build_arrangement(from_segments(M, 3, [], [])).faces) == 1


def test_empty_hive_is_zero():
    h = build_hive(from_segments(M, 3, [], []))
    for p in LatticeHive.points(3):
        assert h.at(hg.pt(*p)) == 0


def test_t3_corner_values(T3):
    h = build_hive(T3)
    c = hg.corners(Fraction(3))
    assert h.at(c[3]) == 0
    assert h.at(c[1]) == 2
    assert h.at(c[2]) == 1


def test_t3_normalization(T3):
    b = build_hive(T3).betas()
    assert b[3] == 0 and b[1] == b[2] == -1


def test_second_differences(T3):
    h = build_hive(T3)
    # unit segment on the w2 leg a=2 crossed by the rhombus around it
    assert second_difference(h, hg.pt(2, 1), hg.pt(2, 2)) == 1
    assert second_difference(build_hive(scale(T3, 2)), hg.pt(2, 1), hg.pt(2, 2)) == 2
    # a small segment inside one face
    assert second_difference(h, hg.pt(Fraction(5, 2), Fraction(1, 4)), hg.pt(Fraction(11, 4), Fraction(1, 4))) == 0


def test_second_difference_rejects_support(T3):
    h = build_hive(T3)
    with pytest.raises(ValueError):
        second_difference(h, hg.pt(2, 0), hg.pt(3, 0))


@settings(max_examples=15)
@given(int_branch, int_branch)
def test_second_difference_recovers_densities(p, q):
    m = grid_sum(p, q)
    h = build_hive(m)
    for e in m.edges:
        P, Q = m.vertices[e.u], m.vertices[e.v]
        mid = hg.mul(hg.add(P, Q), Fraction(1, 2))
        k, L = hg.direction_of(hg.sub(Q, P))
        small = hg.mul(hg.DIRS[k], L / 100)
        # the mass of a segment is density times length
        assert second_difference(h, mid, hg.add(mid, small)) == e.density * L / 100


@given(int_branch, int_branch)
def test_local_pieces_close_up(p, q):
    m = grid_sum(p, q)
    arr = build_arrangement(m)
    h = build_hive(m, arr)
    for pid in range(len(arr.points)):
        assert len(local_pieces(arr, h, pid)) == 6


@given(int_branch, int_branch)
def test_lattice_round_trip(p, q):
    m = grid_sum(p, q)
    lh = lattice_restriction(build_hive(m))
    for B, C, A, A2 in rhombi(lh.n):
        f = lh.as_dict()
        assert f[A] + f[A2] - f[B] - f[C] >= 0
    back = measure_from_hive(lh)
    assert exit_events(back) == exit_events(m)


def test_lattice_round_trip_fixtures(T3, C5):
    for m in (T3, C5):
        assert measure_from_hive(lattice_restriction(build_hive(m))) == m


def test_zero_hive():
    assert measure_from_hive(LatticeHive(3, (Fraction(0),) * 10)).is_zero()


def test_side_values_give_exit_rays():
    h = (0, 0, 1, 3)
    lh = LatticeHive.from_dict(3, {p: h[p[0]] for p in LatticeHive.points(3)})
    m = measure_from_hive(lh)
    side3 = [(e.location, e.density) for e in exit_events(m) if e.side == 3]
    assert side3 == [(hg.pt(1, 0), 1), (hg.pt(2, 0), 1)]


def test_convexity_violation():
    vals = {p: Fraction(0) for p in LatticeHive.points(2)}
    vals[(1, 0)] = Fraction(5)
    with pytest.raises(ConvexityError):
        measure_from_hive(LatticeHive.from_dict(2, vals))


def test_hive_json_round_trip(T3):
    lh = lattice_restriction(build_hive(T3))
    assert LatticeHive.from_json(lh.to_json()) == lh


def test_enumeration_counts(T3):
    zero = {p: Fraction(0) for p in LatticeHive.points(3)}
    assert len(enumerate_hives(zero, 3)) == 1
    lh = lattice_restriction(build_hive(T3)).as_dict()
    assert len(enumerate_hives(lh, 3)) == 1
    hs = enumerate_hives(boundary_from_increments(3, *HF_INCREMENTS), 3)
    assert len(hs) == 2
    a, b = (measure_from_hive(x) for x in hs)
    assert a != b and exit_events(a) == exit_events(b)
