"""Exact planar geometry in the oblique basis (w1, w2).

A point ``(a, b)`` stands for ``a*w1 + b*w2`` where w1, w2, w3 are unit
vectors at 120 degrees with ``w1 + w2 + w3 = 0``.  The six lattice
directions are indexed counterclockwise::

    d0 = ( 1, 0) = w1        d3 = (-1, 0) = -w1
    d1 = ( 1, 1) = -w3       d4 = (-1,-1) = w3
    d2 = ( 0, 1) = w2        d5 = ( 0,-1) = -w2

The triangle of size r has corners X3 = (0, 0), X1 = (r, 0), X2 = (r, r).
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Tuple, Union

Point = Tuple[Fraction, Fraction]
RatLike = Union[int, str, Fraction]

DIRS: Tuple[Point, ...] = tuple(
    (Fraction(a), Fraction(b))
    for a, b in ((1, 0), (1, 1), (0, 1), (-1, 0), (-1, -1), (0, -1))
)

# w_j as a direction index
W = {1: 0, 2: 2, 3: 4}
# direction index -> (j, sign) with d_k = sign * w_j
DIR_TO_W = {0: (1, 1), 2: (2, 1), 4: (3, 1), 3: (1, -1), 5: (2, -1), 1: (3, -1)}


def rat(x: RatLike) -> Fraction:
    """Parse an int, Fraction or ``"p"``/``"p/q"`` string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip()
        if not s or any(c in s for c in ".eE"):
            raise ValueError(f"not a rational literal: {x!r}")
        return Fraction(s)
    raise TypeError(f"cannot convert {type(x).__name__} to a rational")


def fmt_rat(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def pt(a: RatLike, b: RatLike) -> Point:
    return (rat(a), rat(b))


def add(p: Point, q: Point) -> Point:
    return (p[0] + q[0], p[1] + q[1])


def sub(p: Point, q: Point) -> Point:
    return (p[0] - q[0], p[1] - q[1])


def mul(p: Point, c: Fraction) -> Point:
    return (p[0] * c, p[1] * c)


def rotate(k: int, steps: int) -> int:
    """Rotate direction index ``k`` by ``steps`` multiples of 60 degrees (ccw)."""
    return (k + steps) % 6


def direction_of(v: Point) -> Optional[Tuple[int, Fraction]]:
    """Return ``(k, t)`` with ``v = t*d_k``, t > 0, or None if v is not a lattice direction."""
    a, b = v
    if a == 0 and b == 0:
        return None
    if b == 0:
        return (0, a) if a > 0 else (3, -a)
    if a == 0:
        return (2, b) if b > 0 else (5, -b)
    if a == b:
        return (1, a) if a > 0 else (4, -a)
    return None


def norm2(v: Point) -> Fraction:
    """Squared Euclidean norm (w1.w2 = -1/2)."""
    a, b = v
    return a * a + b * b - a * b


def dist2(p: Point, q: Point) -> Fraction:
    return norm2(sub(p, q))


def length(p: Point, q: Point) -> Fraction:
    """Length of a lattice-direction segment; exact."""
    d = direction_of(sub(q, p))
    if d is None:
        raise ValueError(f"segment {p}-{q} is not parallel to a lattice direction")
    return d[1]


def cross(u: Point, v: Point) -> Fraction:
    """Oriented area form; the sign agrees with the Euclidean one."""
    return u[0] * v[1] - u[1] * v[0]


def orient(p: Point, q: Point, r: Point) -> Fraction:
    return cross(sub(q, p), sub(r, p))


def lam(k: int, v: Point) -> Fraction:
    """Unit-slope functional vanishing along d_k and positive on its left."""
    a, b = v
    return (b, b - a, -a, -b, a - b, a)[k % 6]


def intersect_lines(p1: Point, k1: int, p2: Point, k2: int) -> Optional[Point]:
    """Intersection of the lines p1 + t*d_k1 and p2 + s*d_k2; None when parallel."""
    u, v = DIRS[k1 % 6], DIRS[k2 % 6]
    den = cross(u, v)
    if den == 0:
        return None
    t = cross(sub(p2, p1), v) / den
    return add(p1, mul(u, t))


def on_line(p: Point, q: Point, k: int) -> bool:
    return cross(sub(p, q), DIRS[k % 6]) == 0


def in_triangle(p: Point, r: Fraction) -> bool:
    a, b = p
    return 0 <= b <= a <= r


def on_boundary(p: Point, r: Fraction) -> bool:
    a, b = p
    return in_triangle(p, r) and (b == 0 or a == b or a == r)


def corners(r: Fraction) -> dict:
    z = Fraction(0)
    return {3: (z, z), 1: (r, z), 2: (r, r)}


def side_coordinate(p: Point, r: Fraction) -> Optional[Tuple[int, Fraction]]:
    """Side j and distance from X_j for a boundary point; corner X_j reports (j, 0)."""
    a, b = p
    if not in_triangle(p, r):
        return None
    if b == 0 and a < r:
        return (3, a)
    if a == r and b < r:
        return (1, b)
    if a == b:
        return (2, r - a)
    return None


def coordinate_on_side(p: Point, r: Fraction, j: int) -> Fraction:
    """Distance from X_j for a point known to lie on side X_jX_{j+1}."""
    a, b = p
    if j == 3 and b == 0:
        return a
    if j == 1 and a == r:
        return b
    if j == 2 and a == b:
        return r - a
    raise ValueError(f"point {p} is not on side {j} of the triangle of size {r}")


def point_on_side(j: int, x: Fraction, r: Fraction) -> Point:
    if j == 3:
        return (x, Fraction(0))
    if j == 1:
        return (r, x)
    if j == 2:
        return (r - x, r - x)
    raise ValueError(f"bad side {j}")


def sides_of(p: Point, r: Fraction) -> Tuple[int, ...]:
    a, b = p
    out = []
    if b == 0:
        out.append(3)
    if a == r:
        out.append(1)
    if a == b:
        out.append(2)
    return tuple(out)


# direction along side j from X_j to X_{j+1}
SIDE_DIR = {3: 0, 1: 2, 2: 4}


def exits_outward(p: Point, k: int, r: Fraction) -> bool:
    """True if p + t*d_k leaves the triangle for all small t > 0."""
    a, b = p
    da, db = DIRS[k]
    if b == 0 and db < 0:
        return True
    if a == b and db - da > 0:
        return True
    if a == r and da > 0:
        return True
    return False


def to_cartesian(p: Point) -> Tuple[float, float]:
    """Floats for rendering only."""
    a, b = p
    return (float(a) - 0.5 * float(b), math.sqrt(3) / 2 * float(b))
