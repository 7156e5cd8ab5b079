"""Exact Gaussian elimination over the rationals.

Pivoting is deterministic: the first nonzero entry in row order.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]


def _copy(a: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in a]


def rref(a: Sequence[Sequence]) -> Tuple[Matrix, List[int]]:
    m = _copy(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: List[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a: Sequence[Sequence]) -> int:
    if not a or not a[0]:
        return 0
    return len(rref(a)[1])


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)]


def solve(a: Sequence[Sequence], b: Sequence) -> Tuple[Optional[List[Fraction]], int]:
    """Solve a x = b.  Returns (x, nullity); x is None when inconsistent.

    When the nullity is positive, free variables are set to zero.
    """
    n = len(a[0]) if a else 0
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    if not aug:
        return [Fraction(0)] * n, n
    m, piv = rref(aug)
    if n in piv:
        return None, n - len([p for p in piv if p < n])
    x = [Fraction(0)] * n
    for i, c in enumerate(piv):
        x[c] = m[i][n]
    return x, n - len(piv)


def nullspace(a: Sequence[Sequence], n: Optional[int] = None) -> Matrix:
    """Basis of {x : a x = 0}."""
    if n is None:
        n = len(a[0]) if a else 0
    if not a:
        return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    m, piv = rref(a)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, c in enumerate(piv):
            v[c] = -m[i][f]
        basis.append(v)
    return basis


def matvec(a: Sequence[Sequence], x: Sequence) -> List[Fraction]:
    return [sum((Fraction(ai) * xi for ai, xi in zip(row, x)), Fraction(0)) for row in a]
