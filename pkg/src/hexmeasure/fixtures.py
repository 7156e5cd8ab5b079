"""Hand-checkable reference measures shipped with the package."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from .hexgeom import pt
from .measure import M, Measure, dumps, from_segments

FIXTURE_DIR = Path(__file__).parent / "data"


def tripod(branch, r, density=1) -> Measure:
    """Unit tripod at ``branch`` inside the triangle of size r."""
    a, b = pt(*branch)
    r = Fraction(r)
    ends = {1: (r, b), 2: (a, a), 3: (a - b, Fraction(0))}
    segs = [((a, b), ends[j], density) for j in (1, 2, 3)]
    rays = [(ends[j], j, density) for j in (1, 2, 3)]
    return from_segments(M, r, segs, rays)


def t3() -> Measure:
    return tripod((2, 1), 3)


def c5() -> Measure:
    p, q = pt(2, 1), pt(3, 1)
    segs = [
        (p, q, 1),
        (p, pt(2, 2), 1),
        (p, pt(1, 0), 1),
        (q, pt(3, 3), 1),
        (q, pt(2, 0), 1),
        (q, pt(5, 1), 2),
    ]
    rays = [(pt(2, 2), 2, 1), (pt(1, 0), 3, 1), (pt(3, 3), 2, 1), (pt(2, 0), 3, 1), (pt(5, 1), 1, 2)]
    return from_segments(M, 5, segs, rays)


def hf_pair():
    from .arrangement import hf_fixture

    return hf_fixture()


def all_fixtures() -> dict:
    a, b = hf_pair()
    return {"T3.json": t3(), "C5.json": c5(), "HF-a.json": a, "HF-b.json": b}


def write_fixtures(directory=FIXTURE_DIR) -> list:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, m in all_fixtures().items():
        path = directory / name
        path.write_text(dumps(m), encoding="utf-8")
        written.append(path)
    return written
