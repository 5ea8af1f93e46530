"""Static SVG rendering of a polytope and its moving slices.

Hand-rolled SVG so output bytes depend only on the exact input data:
fixed projections, fixed decimal formatting, no drawing library.
"""

from __future__ import annotations

from fractions import Fraction

from . import linalg
from .flow import FlowProblem, FlowTimeline
from .polytope import Polytope, _enumerate_vertices, slice_polytope

PANEL = 260
MARGIN = 26


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _project(pt, m: int) -> tuple[float, float]:
    v = [float(c) for c in pt]
    if m == 1:
        return v[0], 0.0
    if m == 2:
        return v[0], v[1]
    c30, s30 = 0.8660254037844387, 0.5
    return (v[0] - v[1]) * c30, v[2] + (v[0] + v[1]) * s30


def _clip_ineqs(p: Polytope, lo: list[float], hi: list[float]):
    ineq = p.ineq_rows()
    for k in range(p.m):
        e = [Fraction(0)] * p.m
        e[k] = Fraction(1)
        ineq.append((e[:], Fraction(lo[k]).limit_denominator(10**6)))
        ineq.append(([-x for x in e], -Fraction(hi[k]).limit_denominator(10**6)))
    return ineq


def _polytope_edges(p: Polytope, lo, hi):
    """Edges of the polytope clipped to the box, as vertex-coordinate pairs."""
    ineq = _clip_ineqs(p, lo, hi)
    verts = _enumerate_vertices(p.m, [], ineq)
    acts = []
    for v in verts:
        a = set()
        for idx, (row, rhs) in enumerate(ineq):
            if linalg.dot(row, list(v)) == rhs:
                a.add(idx)
        acts.append(a)
    edges = []
    for i in range(len(verts)):
        for j in range(i + 1, len(verts)):
            common = acts[i] & acts[j]
            rows = [list(ineq[k][0]) for k in sorted(common)]
            if rows and linalg.rank(rows) == p.m - 1:
                edges.append((verts[i], verts[j]))
    return edges


def _order_polygon(verts_2d: list[tuple[float, float]]) -> list[tuple[float, float]]:
    import math

    cx = sum(v[0] for v in verts_2d) / len(verts_2d)
    cy = sum(v[1] for v in verts_2d) / len(verts_2d)
    return sorted(verts_2d, key=lambda v: math.atan2(v[1] - cy, v[0] - cx))


def fmt_frac(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def fmt_time(tau: Fraction) -> str:
    """Exact physical time: tau carries a symbolic 1/(2*pi)."""
    t = Fraction(tau) / 2
    if t == 0:
        return "0"
    p, q = t.numerator, t.denominator
    return f"{p}/pi" if q == 1 else f"{p}/({q}*pi)"


def render_flow_svg(problem: FlowProblem, tl: FlowTimeline, taus: list[Fraction],
                    box_pad: float = 0.15) -> str:
    """One panel per requested time: projected polytope frame plus the
    slice at that time (polygon / segment / point by dimension)."""
    p = problem.polytope
    if p.m > 3:
        raise ValueError("rendering supports ambient dimension <= 3")
    snaps = []
    all_pts: list[list[float]] = []
    for tau in taus:
        s = slice_polytope(p, [list(z) for z in problem.zeta], problem.c_of_tau(tau), box=Fraction(10))
        vs = s.vertices()
        snaps.append((tau, s, vs))
        all_pts.extend([[float(c) for c in v] for v in vs])
    for v in _enumerate_vertices(p.m, [], p.ineq_rows()):
        all_pts.append([float(c) for c in v])
    if not all_pts:
        all_pts = [[0.0] * p.m]
    lo = [min(pt[k] for pt in all_pts) for k in range(p.m)]
    hi = [max(pt[k] for pt in all_pts) for k in range(p.m)]
    for k in range(p.m):
        span = max(hi[k] - lo[k], 1.0)
        lo[k] -= box_pad * span
        hi[k] += box_pad * span
    edges = _polytope_edges(p, lo, hi)

    proj_pts = [_project(pt, p.m) for pt in all_pts]
    for a, b in edges:
        proj_pts.append(_project(a, p.m))
        proj_pts.append(_project(b, p.m))
    px = [q[0] for q in proj_pts]
    py = [q[1] for q in proj_pts]
    xmin, xmax = min(px), max(px)
    ymin, ymax = min(py), max(py)
    span = max(xmax - xmin, ymax - ymin, 1e-9)
    scale = (PANEL - 2 * MARGIN) / span

    def to_screen(q):
        return (MARGIN + (q[0] - xmin) * scale, PANEL - MARGIN - (q[1] - ymin) * scale)

    parts = []
    width = PANEL * len(snaps)
    parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL}" '
        f'viewBox="0 0 {width} {PANEL}">'
    )
    for pi, (tau, s, vs) in enumerate(snaps):
        parts.append(f'<g transform="translate({pi * PANEL},0)">')
        parts.append(
            f'<rect x="1" y="1" width="{PANEL - 2}" height="{PANEL - 2}" fill="none" '
            f'stroke="#cccccc" stroke-width="1"/>'
        )
        for a, b in edges:
            qa, qb = to_screen(_project(a, p.m)), to_screen(_project(b, p.m))
            parts.append(
                f'<line x1="{_fmt(qa[0])}" y1="{_fmt(qa[1])}" x2="{_fmt(qb[0])}" '
                f'y2="{_fmt(qb[1])}" stroke="#999999" stroke-width="1"/>'
            )
        pts2d = [to_screen(_project([float(c) for c in v], p.m)) for v in vs]
        dim = _slice_dim(vs)
        if dim >= 2:
            ordered = _order_polygon(pts2d)
            pstr = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in ordered)
            parts.append(
                f'<polygon points="{pstr}" fill="#4477aa" fill-opacity="0.45" '
                f'stroke="#224466" stroke-width="1.5"/>'
            )
        elif dim == 1 and len(pts2d) >= 2:
            (a1, b1), (a2, b2) = pts2d[0], pts2d[-1]
            parts.append(
                f'<line x1="{_fmt(a1)}" y1="{_fmt(b1)}" x2="{_fmt(a2)}" y2="{_fmt(b2)}" '
                f'stroke="#224466" stroke-width="2.5"/>'
            )
        elif pts2d:
            a1, b1 = pts2d[0]
            parts.append(f'<circle cx="{_fmt(a1)}" cy="{_fmt(b1)}" r="3" fill="#224466"/>')
        label = f"tau = {fmt_frac(tau)} (t = {fmt_time(tau)})"
        parts.append(f'<text x="{MARGIN}" y="{PANEL - 8}" font-size="11" fill="#333333">{label}</text>')
        parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _slice_dim(vs) -> int:
    if len(vs) <= 1:
        return 0
    diffs = [[v[j] - vs[0][j] for j in range(len(vs[0]))] for v in vs[1:]]
    return linalg.rank(diffs)


def panel_times(tl: FlowTimeline) -> list[Fraction]:
    """Event times plus the midpoints of the displayed intervals, sorted.

    Display starts at 0 when the backward direction is unbounded (the
    natural initial time), else at the finite lower bound.
    """
    start = tl.tau_lo if tl.tau_lo is not None else Fraction(0)
    stops = [e.tau for e in tl.events if e.tau > start]
    if tl.tau_hi is not None and tl.tau_hi not in stops and tl.tau_hi > start:
        stops.append(tl.tau_hi)
    stops.sort()
    times: list[Fraction] = []
    prev = start
    for s in stops:
        times.append((prev + s) / 2)
        times.append(s)
        prev = s
    if not stops:
        times = [start]
    return times
