"""Exact rational linear algebra on plain lists of Fractions.

Everything here is dense Gaussian elimination at desk scale; inputs are
never mutated.  Rows/vectors are lists, matrices are lists of rows.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd


Vec = list[Fraction]
Mat = list[Vec]


def frac(x) -> Fraction:
    """Coerce ints, strings like '3/4', and Fractions; reject floats."""
    if isinstance(x, float):
        raise TypeError(f"exact arithmetic requires int/str/Fraction, got float {x!r}")
    return Fraction(x)


def vec(xs) -> Vec:
    return [frac(x) for x in xs]


def mat(rows) -> Mat:
    return [vec(r) for r in rows]


def dot(a, b) -> Fraction:
    assert len(a) == len(b)
    return sum((Fraction(x) * Fraction(y) for x, y in zip(a, b)), Fraction(0))


def mat_vec(a: Mat, x: Vec) -> Vec:
    return [dot(row, x) for row in a]


def rref(a: Mat) -> tuple[Mat, list[int]]:
    """Reduced row echelon form and pivot column indices."""
    m = [row[:] for row in a]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = Fraction(1) / m[r][c]
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


def rank(a: Mat) -> int:
    if not a:
        return 0
    return len(rref(a)[1])


def nullspace(a: Mat, cols: int | None = None) -> Mat:
    """Basis of the right null space {x : a @ x = 0}."""
    if not a:
        return [[Fraction(int(i == j)) for j in range(cols or 0)] for i in range(cols or 0)]
    n = len(a[0])
    red, pivots = rref(a)
    free = [c for c in range(n) if c not in pivots]
    basis: Mat = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            v[pc] = -red[r][fc]
        basis.append(v)
    return basis


def solve(a: Mat, b: Vec) -> Vec | None:
    """One exact solution of a @ x = b, or None if inconsistent."""
    if not a:
        return []
    n = len(a[0])
    aug = [row[:] + [bv] for row, bv in zip(a, b)]
    red, pivots = rref(aug)
    if n in pivots:
        return None
    x = [Fraction(0)] * n
    for r, pc in enumerate(pivots):
        x[pc] = red[r][n]
    return x


def det(a: Mat) -> Fraction:
    n = len(a)
    m = [row[:] for row in a]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        inv = Fraction(1) / m[c][c]
        for i in range(c + 1, n):
            if m[i][c] != 0:
                f = m[i][c] * inv
                m[i] = [x - f * y for x, y in zip(m[i], m[c])]
    return d


def clear_denominators(v: Vec) -> list[int]:
    """Scale a rational vector to a primitive integer vector (same line)."""
    if all(x == 0 for x in v):
        return [0] * len(v)
    lcm = 1
    for x in v:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return [x // g for x in ints]
