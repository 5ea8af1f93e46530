"""Integer-lattice algorithms: Hermite form, saturations, torus subgroup data.

All matrices are lists of integer rows; arithmetic is arbitrary precision.
The Hermite convention used throughout is row style: pivots positive,
pivot columns strictly to the right as rows descend, and entries above a
pivot reduced into [0, pivot).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DependentRows
from . import linalg

IntMat = list[list[int]]


def _identity(n: int) -> IntMat:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def hnf(a: IntMat) -> tuple[IntMat, IntMat]:
    """Row-style Hermite normal form.

    Returns (H, U) with H = U @ a and U unimodular.  Zero rows of H sink
    to the bottom; the corresponding rows of U span the left kernel of a.
    """
    h = [list(map(int, row)) for row in a]
    n = len(h)
    m = len(h[0]) if n else 0
    u = _identity(n)
    r = 0
    for c in range(m):
        if r == n:
            break
        # euclidean sweep: one nonzero entry left in column c below row r
        while True:
            live = [i for i in range(r, n) if h[i][c] != 0]
            if not live:
                break
            p = min(live, key=lambda i: abs(h[i][c]))
            if p != r:
                h[r], h[p] = h[p], h[r]
                u[r], u[p] = u[p], u[r]
            done = True
            for i in range(r + 1, n):
                if h[i][c] != 0:
                    q = h[i][c] // h[r][c]
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
                    if h[i][c] != 0:
                        done = False
            if done:
                break
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = h[i][c] // h[r][c]
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                u[i] = [x - q * y for x, y in zip(u[i], u[r])]
        r += 1
    return h, u


def kernel_basis(a: IntMat, cols: int) -> IntMat:
    """Basis of {x in Z^cols : a @ x = 0}; the lattice is saturated."""
    if not a:
        return _identity(cols)
    at = [[row[j] for row in a] for j in range(cols)]  # transpose, cols x n
    h, u = hnf(at)
    return [u[i] for i in range(cols) if all(x == 0 for x in h[i])]


@dataclass(frozen=True)
class LatticeBasis:
    """Z-basis of the saturation (row span intersected with Z^m)."""

    vectors: tuple[tuple[int, ...], ...]
    rank: int


@dataclass(frozen=True)
class SpecialConditionReport:
    is_special: bool
    saturation: LatticeBasis | None
    index: int | None  # [saturation : Z-span of the rows], integral input only
    k_zeta_order: int  # size of (V n 1/2 Z^m)/(V n Z^m)


def _check_independent(rows: IntMat, m: int) -> None:
    if rows and linalg.rank([[Fraction(x) for x in r] for r in rows]) < len(rows):
        raise DependentRows("rows are linearly dependent over Q")


def saturation_basis(zeta: IntMat, m: int | None = None) -> LatticeBasis:
    """Z-basis of Span_R(rows) intersected with Z^m.

    Computed as the integer kernel of the integer kernel: both steps are
    Hermite reductions, so the result is saturated by construction.
    """
    if m is None:
        if not zeta:
            raise ValueError("ambient dimension required for an empty row set")
        m = len(zeta[0])
    if not zeta:
        return LatticeBasis(vectors=(), rank=0)
    _check_independent(zeta, m)
    perp = kernel_basis(zeta, m)
    sat = kernel_basis(perp, m)
    return LatticeBasis(vectors=tuple(tuple(v) for v in sat), rank=len(sat))


def span_index(zeta: IntMat, basis: LatticeBasis) -> int:
    """Index of the integer row span inside its saturation."""
    if not zeta:
        return 1
    b = [[Fraction(x) for x in v] for v in basis.vectors]
    bt = [[b[i][j] for i in range(len(b))] for j in range(len(b[0]))]
    coords = []
    for row in zeta:
        sol = linalg.solve(bt, [Fraction(x) for x in row])
        assert sol is not None, "row not in the span of its own saturation"
        coords.append(sol)
    d = linalg.det(coords)
    assert d.denominator == 1
    return abs(int(d))


def clear_rows(zeta) -> IntMat:
    """Scale each rational row to a primitive integer row (same span)."""
    out = []
    for row in zeta:
        out.append(linalg.clear_denominators([linalg.frac(x) for x in row]))
    return out


def special_condition(zeta, m: int | None = None) -> SpecialConditionReport:
    """Decide whether the row span is generated over Z by integer vectors.

    Rational rows always are: clearing denominators does not move the
    span, and the saturation provides the required basis.  Irrational
    directions cannot be represented here and are rejected upstream.
    """
    rows = [list(r) for r in zeta]
    n = len(rows)
    if n == 0:
        return SpecialConditionReport(True, LatticeBasis((), 0), 1, 1)
    if m is None:
        m = len(rows[0])
    integral = all(linalg.frac(x).denominator == 1 for row in rows for x in row)
    cleared = clear_rows(rows)
    _check_independent(cleared, m)
    sat = saturation_basis(cleared, m)
    index = None
    if integral:
        index = span_index([[int(x) for x in row] for row in rows], sat)
    return SpecialConditionReport(
        is_special=True,
        saturation=sat,
        index=index,
        k_zeta_order=2**n,
    )
