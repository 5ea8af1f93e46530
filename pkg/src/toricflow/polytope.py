"""Exact moment-polytope geometry.

A polytope is the closed half-space intersection of primitive integer
facet normals with rational offsets, possibly unbounded, possibly with a
set of removed faces.  All predicates here (membership, face structure,
slice feasibility, regularity of directions) are decided in exact
rational arithmetic via the simplex solver in :mod:`toricflow.exactlp`.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd

from . import exactlp, linalg
from .errors import ConfigError, DependentRows, EmptyInterior, OutsidePolytope, UnboundedSlice


@dataclass(frozen=True)
class Polytope:
    m: int
    facets: tuple[tuple[tuple[int, ...], Fraction], ...]
    removed_faces: tuple[frozenset[int], ...] = ()

    @classmethod
    def from_data(cls, m, facets, removed_faces=()) -> "Polytope":
        fs = []
        for lam, kap in facets:
            lam = tuple(int(x) for x in lam)
            if len(lam) != m:
                raise ConfigError(f"facet normal {lam} has wrong dimension (expected {m})")
            if all(x == 0 for x in lam):
                raise ConfigError("zero facet normal")
            fs.append((lam, linalg.frac(kap)))
        removed = tuple(frozenset(int(i) for i in r) for r in removed_faces)
        d = len(fs)
        for r in removed:
            if not r or any(i < 1 or i > d for i in r):
                raise ConfigError(f"removed face {sorted(r)} has indices outside 1..{d}")
        return cls(m=m, facets=tuple(fs), removed_faces=removed)

    @property
    def d(self) -> int:
        return len(self.facets)

    def lam(self, i: int) -> tuple[int, ...]:
        """Facet normal, 1-based index."""
        return self.facets[i - 1][0]

    def kap(self, i: int) -> Fraction:
        return self.facets[i - 1][1]

    def ineq_rows(self) -> list[tuple[list[Fraction], Fraction]]:
        return [([Fraction(x) for x in lam], kap) for lam, kap in self.facets]

    def contains(self, y) -> bool:
        yv = linalg.vec(y)
        return all(linalg.dot([Fraction(x) for x in lam], yv) >= kap for lam, kap in self.facets)


@dataclass(frozen=True)
class FaceDescriptor:
    """A face of the closed polytope, canonically labelled by the set of
    facets tight on all of it (1-based indices)."""

    active: frozenset[int]
    dim: int
    witness: tuple[Fraction, ...] | None = None

    def sorted_active(self) -> list[int]:
        return sorted(self.active)


@dataclass(frozen=True)
class CYVector:
    gamma: tuple[int, ...]
    unique: bool


@dataclass(frozen=True)
class Regularity:
    regular: bool
    witness: tuple[int, ...] | None  # nonzero direction in both spans, if singular
    active: frozenset[int]


@dataclass(frozen=True)
class ValidationReport:
    primitive: tuple[bool, ...]
    supporting: tuple[bool, ...]
    redundant: tuple[int, ...]
    bounded: bool
    simple: bool | None
    interior_point: tuple[Fraction, ...]
    warnings: tuple[str, ...]


def _interior_lp(p: Polytope) -> exactlp.LPResult:
    """Maximize the uniform slack t (capped at 1) over the polytope."""
    m = p.m
    ineq = []
    for lam, kap in p.facets:
        ineq.append(([Fraction(x) for x in lam] + [Fraction(-1)], kap))
    ineq.append(([Fraction(0)] * m + [Fraction(-1)], Fraction(-1)))
    obj = [Fraction(0)] * m + [Fraction(1)]
    return exactlp.solve_lp(m + 1, obj, ineq=ineq)


def interior_point(p: Polytope) -> tuple[Fraction, ...]:
    res = _interior_lp(p)
    if res.status != exactlp.OPTIMAL or res.value <= 0:
        raise EmptyInterior("half-space intersection has empty interior")
    return tuple(res.point[: p.m])


def validate(p: Polytope) -> ValidationReport:
    """Check primitivity, support, redundancy, boundedness, simplicity.

    Raises EmptyInterior when the half-space intersection is not
    full-dimensional; everything else is reported, not rejected.
    """
    warnings: list[str] = []
    primitive = []
    for i, (lam, _) in enumerate(p.facets, start=1):
        g = 0
        for x in lam:
            g = gcd(g, abs(x))
        ok = g == 1
        primitive.append(ok)
        if not ok:
            warnings.append(f"facet {i}: normal {lam} is not primitive (gcd {g})")
    point = interior_point(p)  # raises EmptyInterior

    supporting = []
    redundant = []
    for i in range(1, p.d + 1):
        lam_i = [Fraction(x) for x in p.lam(i)]
        ineq = []
        for j in range(1, p.d + 1):
            if j != i:
                ineq.append(([Fraction(x) for x in p.lam(j)] + [Fraction(-1)], p.kap(j)))
        ineq.append(([Fraction(0)] * p.m + [Fraction(-1)], Fraction(-1)))
        res = exactlp.solve_lp(
            p.m + 1,
            [Fraction(0)] * p.m + [Fraction(1)],
            eq=[(lam_i + [Fraction(0)], p.kap(i))],
            ineq=ineq,
        )
        sup = res.status == exactlp.OPTIMAL and res.value > 0
        supporting.append(sup)
        if not sup:
            warnings.append(f"facet {i}: not supporting (touches in dimension < {p.m - 1})")
        others = [([Fraction(x) for x in p.lam(j)], p.kap(j)) for j in range(1, p.d + 1) if j != i]
        res2 = exactlp.solve_lp(p.m, lam_i, ineq=others, maximize=False)
        if res2.status == exactlp.OPTIMAL and res2.value >= p.kap(i):
            redundant.append(i)
            warnings.append(f"facet {i}: redundant")

    bounded = True
    for k in range(p.m):
        obj = [Fraction(0)] * p.m
        obj[k] = Fraction(1)
        for mx in (True, False):
            if exactlp.solve_lp(p.m, obj, ineq=p.ineq_rows(), maximize=mx).status == exactlp.UNBOUNDED:
                bounded = False
    simple: bool | None = None
    try:
        verts = [f for f in proper_faces(p) if f.dim == 0]
        simple = all(len(f.active) == p.m for f in verts)
        if not simple:
            warnings.append("polytope is not simple (a vertex lies on more than m facets)")
    except Exception:
        simple = None
    return ValidationReport(
        primitive=tuple(primitive),
        supporting=tuple(supporting),
        redundant=tuple(redundant),
        bounded=bounded,
        simple=simple,
        interior_point=point,
        warnings=tuple(warnings),
    )


def _implied_active(p: Polytope, seed: frozenset[int]) -> FaceDescriptor | None:
    """Canonical face generated by forcing the seed facets tight."""
    eq = [([Fraction(x) for x in p.lam(i)], p.kap(i)) for i in sorted(seed)]
    ineq = [([Fraction(x) for x in p.lam(j)], p.kap(j)) for j in range(1, p.d + 1) if j not in seed]
    pt = exactlp.feasible_point(p.m, eq=eq, ineq=ineq)
    if pt is None:
        return None
    implied = set(seed)
    for j in range(1, p.d + 1):
        if j in implied:
            continue
        lam_j = [Fraction(x) for x in p.lam(j)]
        res = exactlp.solve_lp(p.m, lam_j, eq=eq, ineq=ineq)
        if res.status == exactlp.OPTIMAL and res.value == p.kap(j):
            implied.add(j)
    rows = [[Fraction(x) for x in p.lam(i)] for i in sorted(implied)]
    dim = p.m - linalg.rank(rows)
    return FaceDescriptor(active=frozenset(implied), dim=dim, witness=tuple(pt))


def proper_faces(p: Polytope) -> list[FaceDescriptor]:
    """All nonempty proper faces of the closure, by canonical active set."""
    seen: dict[frozenset[int], FaceDescriptor] = {}
    queue: list[frozenset[int]] = [frozenset([i]) for i in range(1, p.d + 1)]
    tried: set[frozenset[int]] = set(queue)
    while queue:
        seed = queue.pop()
        f = _implied_active(p, seed)
        if f is None:
            continue
        if f.active not in seen:
            seen[f.active] = f
            for j in range(1, p.d + 1):
                if j not in f.active:
                    nxt = f.active | {j}
                    if nxt not in tried:
                        tried.add(nxt)
                        queue.append(nxt)
    return sorted(seen.values(), key=lambda f: (f.dim, tuple(sorted(f.active))))


def active_set(p: Polytope, y) -> FaceDescriptor:
    """Exact tight-facet set at a point of the closed polytope."""
    yv = linalg.vec(y)
    if len(yv) != p.m:
        raise ConfigError(f"point has dimension {len(yv)}, expected {p.m}")
    act = set()
    for i in range(1, p.d + 1):
        s = linalg.dot([Fraction(x) for x in p.lam(i)], yv) - p.kap(i)
        if s < 0:
            raise OutsidePolytope(f"facet {i} inequality fails by {-s}")
        if s == 0:
            act.add(i)
    rows = [[Fraction(x) for x in p.lam(i)] for i in sorted(act)]
    return FaceDescriptor(active=frozenset(act), dim=p.m - linalg.rank(rows), witness=tuple(yv))


def zeta_regular(p: Polytope, zeta, y=None, active: frozenset[int] | None = None) -> Regularity:
    """Decide whether Span(zeta rows) meets Span{active facet normals}.

    Exact rank computation; the singular witness is a primitive integer
    vector lying in both spans.
    """
    if active is None:
        if y is None:
            raise ValueError("need a point or an active set")
        active = active_set(p, y).active
    zrows = [linalg.vec(r) for r in zeta]
    lam_rows = [[Fraction(x) for x in p.lam(i)] for i in sorted(active)]
    perp_v = linalg.nullspace(zrows, cols=p.m) if zrows else [
        [Fraction(int(i == j)) for j in range(p.m)] for i in range(p.m)
    ]
    perp_z = linalg.nullspace(lam_rows, cols=p.m) if lam_rows else [
        [Fraction(int(i == j)) for j in range(p.m)] for i in range(p.m)
    ]
    inter = linalg.nullspace(perp_v + perp_z, cols=p.m)
    if not inter:
        return Regularity(regular=True, witness=None, active=active)
    w = tuple(linalg.clear_denominators(inter[0]))
    return Regularity(regular=False, witness=w, active=active)


def cy_vector(p: Polytope) -> CYVector | None:
    """Integer vector pairing to 1 with every facet normal, if one exists.

    When the solution lattice is positive-dimensional the returned
    representative is the canonical reduced one (smallest coordinates in
    absolute value, ties to nonnegative) and ``unique`` is False.
    """
    from . import lattice

    lam_rows = [list(lam) for lam, _ in p.facets]
    ones = [Fraction(1)] * p.d
    if linalg.solve([[Fraction(x) for x in row] for row in lam_rows], ones) is None:
        return None
    # integer solvability through the Hermite form of the transpose
    at = [[row[j] for row in lam_rows] for j in range(p.m)]  # m x d
    h, u = lattice.hnf(at)
    c_cols = [[Fraction(h[i][j]) for i in range(p.m)] for j in range(p.d)]  # d x m
    t = linalg.solve(c_cols, ones)
    if t is None:
        return None
    if any(x.denominator != 1 for x in t):
        return None
    gamma = [0] * p.m
    for k in range(p.m):
        if t[k]:
            gamma = [g + int(t[k]) * u[k][j] for j, g in enumerate(gamma)]
    kern = lattice.kernel_basis(lam_rows, p.m)
    unique = not kern
    if kern:
        gamma = _reduce_by_lattice(gamma, kern)
    check = [sum(g * l for g, l in zip(gamma, lam)) for lam, _ in p.facets]
    assert all(v == 1 for v in check), "CY pairing verification failed"
    return CYVector(gamma=tuple(gamma), unique=unique)


def _key(g: list[int]) -> tuple:
    return tuple((abs(x), 0 if x >= 0 else 1) for x in g)


def _reduce_by_lattice(g: list[int], kern: list[list[int]]) -> list[int]:
    from . import lattice

    basis, _ = lattice.hnf(kern)
    basis = [row for row in basis if any(row)]
    out = g[:]
    for row in basis:
        piv = next(j for j, x in enumerate(row) if x)
        q = out[piv] // row[piv]
        if q:
            out = [a - q * b for a, b in zip(out, row)]
    best = out
    if len(basis) <= 3:
        span = range(-3, 4)
        for coeffs in itertools.product(span, repeat=len(basis)):
            cand = out[:]
            for c, row in zip(coeffs, basis):
                if c:
                    cand = [a + c * b for a, b in zip(cand, row)]
            if _key(cand) < _key(best):
                best = cand
    return best


@dataclass
class SlicePolyhedron:
    """The polytope cut by the affine constraints <y, zeta_i> = c_i."""

    base: Polytope
    zeta: tuple[tuple[Fraction, ...], ...]
    c: tuple[Fraction, ...]
    feasible: bool
    meets_interior: bool
    touched: frozenset[int]
    bounded: bool | None
    box: Fraction | None = None
    box_clipped: bool = False
    _vertices: tuple[tuple[Fraction, ...], ...] | None = field(default=None, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def n(self) -> int:
        return len(self.zeta)

    def eq_rows(self) -> list[tuple[list[Fraction], Fraction]]:
        return [(list(z), cv) for z, cv in zip(self.zeta, self.c)]

    def vertices(self) -> tuple[tuple[Fraction, ...], ...]:
        """Exact vertex list; memoized.  Unbounded slices are clipped to
        the configured box (and flagged), since their vertex set alone
        does not determine them."""
        with self._lock:
            if self._vertices is not None:
                return self._vertices
            if not self.feasible:
                self._vertices = ()
                return self._vertices
            p = self.base
            ineq = p.ineq_rows()
            if not self.bounded:
                if self.box is None:
                    raise UnboundedSlice("unbounded slice: set a bounding box to enumerate vertices")
                for k in range(p.m):
                    e = [Fraction(0)] * p.m
                    e[k] = Fraction(1)
                    ineq.append((e[:], -self.box))
                    ineq.append(([-x for x in e], -self.box))
                self.box_clipped = True
            verts = _enumerate_vertices(p.m, self.eq_rows(), ineq)
            self._vertices = verts
            return verts


def _enumerate_vertices(m, eq, ineq) -> tuple[tuple[Fraction, ...], ...]:
    n = len(eq)
    need = m - n
    found: set[tuple[Fraction, ...]] = set()
    if need < 0:
        return ()
    for combo in itertools.combinations(range(len(ineq)), need):
        rows = [list(r) for r, _ in eq] + [list(ineq[i][0]) for i in combo]
        rhs = [b for _, b in eq] + [ineq[i][1] for i in combo]
        if linalg.det(rows) == 0:
            continue
        sol = linalg.solve(rows, rhs)
        if sol is None:
            continue
        if all(linalg.dot(a, sol) >= b for a, b in ineq):
            found.add(tuple(sol))
    return tuple(sorted(found))


def slice_polytope(p: Polytope, zeta, c, box=None) -> SlicePolyhedron:
    """Cut the polytope by exact affine constraints.

    Decides feasibility, interior contact, the touched-facet set and
    boundedness up front (all by rational LPs); vertices are lazy.
    """
    zrows = tuple(tuple(linalg.frac(x) for x in row) for row in zeta)
    cvals = tuple(linalg.frac(x) for x in c)
    if len(zrows) != len(cvals):
        raise ConfigError("zeta and c length mismatch")
    n = len(zrows)
    if n:
        if any(len(r) != p.m for r in zrows):
            raise ConfigError("zeta row dimension mismatch")
        if linalg.rank([list(r) for r in zrows]) < n:
            raise DependentRows("zeta rows are linearly dependent")
    box_f = None if box is None else linalg.frac(box)
    eq = [(list(z), cv) for z, cv in zip(zrows, cvals)]
    ineq = p.ineq_rows()
    pt = exactlp.feasible_point(p.m, eq=eq, ineq=ineq)
    if pt is None:
        return SlicePolyhedron(p, zrows, cvals, False, False, frozenset(), None, box=box_f)

    eq_t = [(list(z) + [Fraction(0)], cv) for z, cv in zip(zrows, cvals)]
    ineq_t = [([Fraction(x) for x in lam] + [Fraction(-1)], kap) for lam, kap in p.facets]
    ineq_t.append(([Fraction(0)] * p.m + [Fraction(-1)], Fraction(-1)))
    res = exactlp.solve_lp(p.m + 1, [Fraction(0)] * p.m + [Fraction(1)], eq=eq_t, ineq=ineq_t)
    meets_interior = res.status == exactlp.OPTIMAL and res.value > 0

    touched = set()
    for i in range(1, p.d + 1):
        eq_i = eq + [([Fraction(x) for x in p.lam(i)], p.kap(i))]
        if exactlp.feasible_point(p.m, eq=eq_i, ineq=ineq) is not None:
            touched.add(i)

    bounded = True
    for k in range(p.m):
        obj = [Fraction(0)] * p.m
        obj[k] = Fraction(1)
        for mx in (True, False):
            if exactlp.solve_lp(p.m, obj, eq=eq, ineq=ineq, maximize=mx).status == exactlp.UNBOUNDED:
                bounded = False
    return SlicePolyhedron(
        p, zrows, cvals, True, meets_interior, frozenset(touched), bounded, box=box_f,
    )


@dataclass(frozen=True)
class SliceFace:
    verts: tuple[int, ...]  # indices into the slice vertex list
    active: frozenset[int]  # base facets tight on the whole face
    dim: int


def slice_faces(s: SlicePolyhedron) -> list[SliceFace]:
    """Face lattice of a bounded feasible slice from its vertex actives."""
    if not s.feasible:
        return []
    if not s.bounded:
        raise UnboundedSlice("face lattice needs a bounded slice")
    verts = s.vertices()
    p = s.base
    acts = []
    for v in verts:
        a = set()
        for i in range(1, p.d + 1):
            if linalg.dot([Fraction(x) for x in p.lam(i)], list(v)) == p.kap(i):
                a.add(i)
        acts.append(frozenset(a))
    # closure of vertex active sets under intersection labels every face
    closure: set[frozenset[int]] = set(acts)
    closure.add(frozenset.intersection(*acts) if acts else frozenset())
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(list(closure), 2):
            ab = a & b
            if ab not in closure:
                closure.add(ab)
                changed = True
    faces: dict[tuple[int, ...], SliceFace] = {}
    for a in closure:
        vs = tuple(i for i, va in enumerate(acts) if a <= va)
        if not vs:
            continue
        common = frozenset.intersection(*[acts[i] for i in vs])
        diffs = [[verts[i][j] - verts[vs[0]][j] for j in range(p.m)] for i in vs[1:]]
        dim = linalg.rank(diffs) if diffs else 0
        key = vs
        if key not in faces:
            faces[key] = SliceFace(verts=vs, active=common, dim=dim)
    return sorted(faces.values(), key=lambda f: (f.dim, f.verts))


@dataclass(frozen=True)
class RegularitySummary:
    regular: bool
    witness_active: frozenset[int] | None
    witness_point: tuple[Fraction, ...] | None


def slice_regularity(s: SlicePolyhedron) -> RegularitySummary:
    """True iff every face of the closure met by the slice is regular for
    the slicing directions.  Works for unbounded slices too: realized
    active sets are enumerated by pruned LP search, not via vertices."""
    if not s.feasible:
        return RegularitySummary(True, None, None)
    p = s.base
    eq = s.eq_rows()
    realized: set[frozenset[int]] = set()
    queue: list[frozenset[int]] = [frozenset([i]) for i in sorted(s.touched)]
    tried = set(queue)
    witnesses: dict[frozenset[int], tuple[Fraction, ...]] = {}
    while queue:
        seed = queue.pop()
        eq_f = eq + [([Fraction(x) for x in p.lam(i)], p.kap(i)) for i in sorted(seed)]
        ineq = [([Fraction(x) for x in p.lam(j)], p.kap(j)) for j in range(1, p.d + 1) if j not in seed]
        pt = exactlp.feasible_point(p.m, eq=eq_f, ineq=ineq)
        if pt is None:
            continue
        realized.add(seed)
        witnesses[seed] = tuple(pt)
        for j in sorted(s.touched):
            if j not in seed:
                nxt = seed | {j}
                if nxt not in tried:
                    tried.add(nxt)
                    queue.append(nxt)
    for a in sorted(realized, key=lambda x: (len(x), tuple(sorted(x)))):
        reg = zeta_regular(p, [list(r) for r in s.zeta], active=a)
        if not reg.regular:
            return RegularitySummary(False, a, witnesses[a])
    return RegularitySummary(True, None, None)
