import random
from fractions import Fraction

import pytest

from toricflow import lattice, linalg
from toricflow.errors import DependentRows


def mat_mul(a, b):
    return [[sum(x * y for x, y in zip(row, col)) for col in zip(*b)] for row in a]


def int_det(a):
    d = linalg.det([[Fraction(x) for x in row] for row in a])
    assert d.denominator == 1
    return int(d)


def is_row_hnf(h):
    pivots = []
    last = -1
    for row in h:
        nz = [j for j, x in enumerate(row) if x != 0]
        if not nz:
            continue
        p = nz[0]
        assert p > last, "pivot columns must move right"
        assert row[p] > 0, "pivot must be positive"
        pivots.append((len(pivots), p))
        last = p
    for r, p in pivots:
        for i in range(r):
            assert 0 <= h[i][p] < h[r][p], "entries above pivot must be reduced"
    return True


def test_hnf_2x2_example():
    a = [[2, 4], [1, 3]]
    h, u = lattice.hnf(a)
    assert h == [[1, 1], [0, 2]]
    assert mat_mul(u, a) == h
    assert abs(int_det(u)) == 1


def test_hnf_identity():
    a = [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    h, u = lattice.hnf(a)
    assert h == a
    assert u == a


def test_hnf_single_row():
    h, u = lattice.hnf([[3, 1, 5]])
    assert h == [[3, 1, 5]]
    assert u == [[1]]


def test_hnf_zero_matrix():
    h, u = lattice.hnf([[0, 0], [0, 0]])
    assert h == [[0, 0], [0, 0]]
    assert abs(int_det(u)) == 1


def test_hnf_random_reconstruction():
    rng = random.Random(7)
    for _ in range(60):
        n = rng.randint(1, 4)
        m = rng.randint(n, 5)
        a = [[rng.randint(-9, 9) for _ in range(m)] for _ in range(n)]
        h, u = lattice.hnf(a)
        assert mat_mul(u, a) == h
        assert abs(int_det(u)) == 1
        assert is_row_hnf(h)


def test_saturation_primitive_row():
    b = lattice.saturation_basis([[3, 1, 5]])
    assert b.vectors == ((3, 1, 5),)
    assert b.rank == 1


def test_saturation_scaled_basis():
    b = lattice.saturation_basis([[2, 0], [0, 2]])
    assert set(b.vectors) == {(1, 0), (0, 1)}
    assert lattice.span_index([[2, 0], [0, 2]], b) == 4


def test_saturation_standard_vector():
    b = lattice.saturation_basis([[1, 0, 0, 0]])
    assert b.vectors == ((1, 0, 0, 0),)


def test_saturation_dependent_rows():
    with pytest.raises(DependentRows):
        lattice.saturation_basis([[1, 2], [2, 4]])


def enumerate_span_lattice_points(zeta, bound=6):
    """All integer points of the row span whose pivot-coordinate block is
    inside [-bound, bound]^n; exact free-coordinate enumeration."""
    n = len(zeta)
    m = len(zeta[0])
    frac_rows = [[Fraction(x) for x in row] for row in zeta]
    cols = None
    import itertools

    for combo in itertools.combinations(range(m), n):
        sq = [[frac_rows[i][j] for j in combo] for i in range(n)]
        if linalg.det(sq) != 0:
            cols = combo
            break
    assert cols is not None
    sq = [[frac_rows[i][j] for j in cols] for i in range(n)]
    pts = set()
    for assign in itertools.product(range(-bound, bound + 1), repeat=n):
        # solve t @ sq = assign  (t row vector)
        t = linalg.solve([list(r) for r in zip(*sq)], [Fraction(v) for v in assign])
        if t is None:
            continue
        y = [sum(t[i] * frac_rows[i][j] for i in range(n)) for j in range(m)]
        if all(v.denominator == 1 for v in y):
            pts.add(tuple(int(v) for v in y))
    return pts


def in_integer_span(point, basis):
    if not basis:
        return all(v == 0 for v in point)
    bt = [[Fraction(b[i]) for b in basis] for i in range(len(point))]
    sol = linalg.solve(bt, [Fraction(v) for v in point])
    return sol is not None and all(v.denominator == 1 for v in sol)


def test_saturation_against_bruteforce_oracle():
    rng = random.Random(123)
    done = 0
    while done < 20:
        n = rng.randint(1, 3)
        m = rng.randint(n, 5)
        zeta = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(n)]
        if linalg.rank([[Fraction(x) for x in r] for r in zeta]) < n:
            continue
        basis = lattice.saturation_basis(zeta)
        for b in basis.vectors:
            assert in_integer_span(b, [list(v) for v in basis.vectors])
        pts = enumerate_span_lattice_points(zeta)
        for pt in pts:
            assert in_integer_span(pt, [list(v) for v in basis.vectors]), (zeta, pt)
        for row in zeta:
            assert in_integer_span(row, [list(v) for v in basis.vectors])
        done += 1


def test_special_condition_535():
    rep = lattice.special_condition([[3, 1, 5]])
    assert rep.is_special
    assert rep.k_zeta_order == 2
    assert rep.index == 1
    assert rep.saturation.vectors == ((3, 1, 5),)


def test_special_condition_rational_row():
    rep = lattice.special_condition([[1, Fraction(141421356, 100000000)]])
    assert rep.is_special
    assert rep.k_zeta_order == 2
    assert rep.index is None  # non-integral input has no integral span index


def test_special_condition_empty():
    rep = lattice.special_condition([])
    assert rep.is_special
    assert rep.k_zeta_order == 1
    assert rep.saturation.rank == 0


def test_special_condition_k_order_power_of_two():
    rng = random.Random(5)
    done = 0
    while done < 15:
        n = rng.randint(0, 3)
        m = max(n, rng.randint(1, 5))
        zeta = [[rng.randint(-4, 4) for _ in range(m)] for _ in range(n)]
        if n and linalg.rank([[Fraction(x) for x in r] for r in zeta]) < n:
            continue
        rep = lattice.special_condition(zeta, m=m)
        assert rep.is_special
        assert rep.k_zeta_order == 2**n
        assert rep.saturation.rank == n
        done += 1


def test_kernel_basis_saturated():
    k = lattice.kernel_basis([[2, 4, 6]], 3)
    assert len(k) == 2
    for v in k:
        assert sum(a * b for a, b in zip(v, [2, 4, 6])) == 0
    # kernel lattice is saturated: (1,1,-1) is in the rational kernel iff integer combo
    assert in_integer_span((1, 1, -1), k)
