"""Gluing sign-labelled copies of a slice polytope into a cell complex.

The level set over a slice is modelled as 2^m copies of the slice, one
per orthant sign vector, identified across each polytope facet i by the
sign map flipping the coordinates where the facet normal is odd.  This
is the standard real-toric (small cover) gluing; it reproduces the
published sphere/torus sequences and is validated against a brute-force
union-find construction in the test suite.

Sign vectors are stored as bitmasks (bit j set = minus sign in slot j).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SingularSlice, UnboundedSlice
from .lattice import SpecialConditionReport
from .polytope import Polytope, SliceFace, SlicePolyhedron, slice_faces, slice_regularity


def sign_mask(lam: tuple[int, ...]) -> int:
    """Facet sign map: bit j set where the normal component is odd."""
    mask = 0
    for j, x in enumerate(lam):
        if x % 2:
            mask |= 1 << j
    return mask


def _echelon(gens: list[int]) -> list[int]:
    basis: list[int] = []
    for g in gens:
        cur = g
        for b in basis:
            cur = min(cur, cur ^ b)
        if cur:
            basis.append(cur)
            basis.sort(reverse=True)
    # re-reduce to a canonical echelon set
    out: list[int] = []
    for b in sorted(basis, reverse=True):
        cur = b
        for o in out:
            cur = min(cur, cur ^ o)
        if cur:
            out.append(cur)
    return sorted(out, reverse=True)


def _canon(eps: int, basis: list[int]) -> int:
    cur = eps
    for b in basis:
        cur = min(cur, cur ^ b)
    return cur


def gf2_rank(rows: list[int]) -> int:
    pivots: dict[int, int] = {}
    r = 0
    for row in rows:
        cur = row
        while cur:
            b = cur.bit_length() - 1
            if b in pivots:
                cur ^= pivots[b]
            else:
                pivots[b] = cur
                r += 1
                break
    return r


@dataclass(frozen=True)
class Cell:
    dim: int
    face_idx: int
    eps: int  # canonical coset representative


@dataclass
class GluedComplex:
    m: int
    dim: int
    n_torus: int
    faces: list[SliceFace]
    cells: list[list[Cell]]  # by dimension
    boundary: list[list[tuple[int, ...]]]  # boundary[d][i] = child indices in dim d-1
    open_complex: bool = False
    _index: dict[tuple[int, int], int] = field(default_factory=dict, repr=False)

    def cell_counts(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.cells)


def glue(s: SlicePolyhedron, p: Polytope | None = None) -> GluedComplex:
    """Build the glued complex of a bounded regular slice.

    Cells in dimension k are pairs (k-face of the slice, sign class),
    where the class is taken modulo the group generated by the sign maps
    of the facets containing that face.  Cells over removed faces of the
    polytope are dropped and the complex is flagged open.
    """
    p = p or s.base
    reg = slice_regularity(s)
    if not reg.regular:
        raise SingularSlice(
            f"slice meets a singular face {sorted(reg.witness_active or ())}; topology undefined"
        )
    if not s.bounded:
        raise UnboundedSlice("gluing requires a bounded slice")
    faces = slice_faces(s)
    if not faces:
        raise SingularSlice("slice has no faces (empty)")
    m = p.m
    sigma = {i: sign_mask(p.lam(i)) for i in range(1, p.d + 1)}

    removed = list(p.removed_faces)
    open_complex = False
    kept: list[SliceFace] = []
    for f in faces:
        if any(r <= f.active for r in removed):
            open_complex = True
            continue
        kept.append(f)
    faces = kept
    top_dim = max((f.dim for f in faces), default=0)

    bases = []
    reps_per_face = []
    for f in faces:
        basis = _echelon([sigma[i] for i in sorted(f.active)])
        bases.append(basis)
        reps = [e for e in range(1 << m) if _canon(e, basis) == e]
        reps_per_face.append(reps)

    cells: list[list[Cell]] = [[] for _ in range(top_dim + 1)]
    index: dict[tuple[int, int], int] = {}
    for fi, f in enumerate(faces):
        for e in reps_per_face[fi]:
            idx = len(cells[f.dim])
            index[(fi, e)] = idx
            cells[f.dim].append(Cell(dim=f.dim, face_idx=fi, eps=e))

    # cover relations of the slice face lattice
    covers: dict[int, list[int]] = {fi: [] for fi in range(len(faces))}
    for fi, f in enumerate(faces):
        fv = set(f.verts)
        for ei, e in enumerate(faces):
            if e.dim == f.dim - 1 and set(e.verts) < fv:
                covers[fi].append(ei)

    boundary: list[list[tuple[int, ...]]] = [[] for _ in range(top_dim + 1)]
    for d in range(top_dim + 1):
        for cell in cells[d]:
            children = []
            for ei in covers[cell.face_idx]:
                child_eps = _canon(cell.eps, bases[ei])
                children.append(index[(ei, child_eps)])
            boundary[d].append(tuple(sorted(children)))

    g = GluedComplex(m=m, dim=top_dim, n_torus=s.n, faces=faces, cells=cells,
                     boundary=boundary, open_complex=open_complex, _index=index)
    _assert_boundary_squares_to_zero(g)
    return g


def _assert_boundary_squares_to_zero(g: GluedComplex) -> None:
    for d in range(2, g.dim + 1):
        for children in g.boundary[d]:
            grand: dict[int, int] = {}
            for ci in children:
                for gi in g.boundary[d - 1][ci]:
                    grand[gi] = grand.get(gi, 0) ^ 1
            assert not any(grand.values()), "boundary of boundary is nonzero mod 2"


@dataclass(frozen=True)
class TopologyReport:
    dim: int
    cell_counts: tuple[int, ...]
    components: int
    euler: int
    betti_mod2: tuple[int, ...]
    orientable: bool | None
    closed_manifold: bool
    surface_type: str | None
    component_surfaces: tuple[str, ...] = ()
    total_space_note: str | None = None


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _global_ids(g: GluedComplex) -> list[int]:
    offsets = [0]
    for d in range(g.dim + 1):
        offsets.append(offsets[-1] + len(g.cells[d]))
    return offsets


def _classify_surface(orientable: bool | None, euler: int) -> str | None:
    if orientable is None:
        return None
    if orientable:
        if euler == 2:
            return "S2"
        if euler == 0:
            return "T2"
        g = (2 - euler) // 2
        return f"genus-{g} surface"
    if euler == 1:
        return "RP2"
    if euler == 0:
        return "Klein bottle"
    return f"connected sum of {2 - euler} RP2"


def topology(g: GluedComplex) -> TopologyReport:
    """Components, Euler characteristic, mod-2 Betti numbers, and (for
    closed surfaces) orientability plus the classification label."""
    counts = g.cell_counts()
    euler = sum((-1) ** d * c for d, c in enumerate(counts))
    offsets = _global_ids(g)
    total = offsets[-1]
    dsu = _DSU(total)
    for d in range(1, g.dim + 1):
        for i, children in enumerate(g.boundary[d]):
            for ci in children:
                dsu.union(offsets[d] + i, offsets[d - 1] + ci)
    components = len({dsu.find(i) for i in range(total)})

    betti = []
    ranks = []
    for d in range(g.dim + 1):
        rows = []
        for children in g.boundary[d]:
            mask = 0
            for ci in children:
                mask ^= 1 << ci
            rows.append(mask)
        ranks.append(gf2_rank(rows) if d > 0 else 0)
    ranks.append(0)
    for d in range(g.dim + 1):
        betti.append(counts[d] - ranks[d] - ranks[d + 1])

    orientable: bool | None
    closed = True
    if g.dim == 0:
        orientable = True
    else:
        sides: dict[int, list[int]] = {}
        for ti, children in enumerate(g.boundary[g.dim]):
            for ci in children:
                sides.setdefault(ci, []).append(ti)
        if len(sides) < len(g.cells[g.dim - 1]) or any(len(v) != 2 for v in sides.values()):
            closed = False
            orientable = None
        else:
            color = [-1] * len(g.cells[g.dim])
            orientable = True
            for start in range(len(g.cells[g.dim])):
                if color[start] != -1:
                    continue
                color[start] = 0
                stack = [start]
                while stack and orientable:
                    t = stack.pop()
                    for ci in g.boundary[g.dim][t]:
                        a, b = sides[ci]
                        other = b if a == t else a
                        if color[other] == -1:
                            color[other] = 1 - color[t]
                            stack.append(other)
                        elif color[other] == color[t]:
                            orientable = False
                            break

    surface = None
    comp_surfaces: tuple[str, ...] = ()
    if g.dim == 2 and closed and not g.open_complex:
        if components == 1:
            surface = _classify_surface(orientable, euler)
            comp_surfaces = (surface,) if surface else ()
        else:
            comp_surfaces = tuple(
                _classify_surface(co, ce) or "?" for co, ce in _per_component(g, dsu, offsets)
            )
            surface = " + ".join(comp_surfaces)
    return TopologyReport(
        dim=g.dim,
        cell_counts=counts,
        components=components,
        euler=euler,
        betti_mod2=tuple(betti),
        orientable=orientable,
        closed_manifold=closed,
        surface_type=surface,
        component_surfaces=comp_surfaces,
    )


def _per_component(g: GluedComplex, dsu: _DSU, offsets: list[int]):
    """(orientable, euler) pairs per connected component, top-dim grouping."""
    comp_of_top: dict[int, list[int]] = {}
    for i in range(len(g.cells[g.dim])):
        comp_of_top.setdefault(dsu.find(offsets[g.dim] + i), []).append(i)
    out = []
    for root in sorted(comp_of_top):
        members = set()
        for d in range(g.dim + 1):
            for i in range(len(g.cells[d])):
                if dsu.find(offsets[d] + i) == root:
                    members.add((d, i))
        euler = sum((-1) ** d for d, _ in members)
        # orientation propagation restricted to this component
        sides: dict[int, list[int]] = {}
        for ti in comp_of_top[root]:
            for ci in g.boundary[g.dim][ti]:
                sides.setdefault(ci, []).append(ti)
        orientable: bool | None = True
        if any(len(v) != 2 for v in sides.values()):
            orientable = None
        else:
            color = {t: -1 for t in comp_of_top[root]}
            for start in comp_of_top[root]:
                if color[start] != -1:
                    continue
                color[start] = 0
                stack = [start]
                while stack and orientable:
                    t = stack.pop()
                    for ci in g.boundary[g.dim][t]:
                        a, b = sides[ci]
                        other = b if a == t else a
                        if color[other] == -1:
                            color[other] = 1 - color[t]
                            stack.append(other)
                        elif color[other] == color[t]:
                            orientable = False
                            break
        out.append((orientable, euler))
    return out


def total_space(report: TopologyReport, special: SpecialConditionReport) -> str:
    """Describe the total space: base level set times the torus factor.

    With the integral condition the torus factor is an honest n-torus and
    a free (Z/2)^n quotient model exists; without it only a ball-sized
    neighborhood in the span can be used.
    """
    n = special.saturation.rank if special.saturation is not None else 0
    if not special.is_special:
        return "M x U (U a small ball in the slicing span; no closed torus factor)"
    if n == 0:
        return "the real form itself (no torus factor)"
    base = report.surface_type if report.surface_type else f"M (chi={report.euler}, {report.components} component(s))"
    if report.dim == 0:
        return f"T^{n} per component ({report.components} components)"
    note = f"{base} x T^{n}"
    if special.k_zeta_order > 1:
        note += f"; free quotient model by the order-{special.k_zeta_order} sign group available"
    return note
