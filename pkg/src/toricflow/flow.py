"""Exact slice motion: the affine flow c_i(tau) = c_i - <gamma, zeta_i> tau.

Time is kept as the rational variable tau (the physical time carries an
extra 1/(2*pi) that never enters exact arithmetic; report formatting adds
it back symbolically).  Events are located by rational LPs over the
polytope lifted by the time variable, so every event time is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import exactlp, linalg
from .errors import ConfigError, OutsideInterval
from .polytope import (
    FaceDescriptor,
    Polytope,
    RegularitySummary,
    SlicePolyhedron,
    proper_faces,
    slice_polytope,
    slice_regularity,
    zeta_regular,
)

SINGULAR_CROSSING = "singular_crossing"
COMBINATORIAL_CHANGE = "combinatorial_change"
EXTINCTION = "extinction"


@dataclass(frozen=True)
class FlowProblem:
    polytope: Polytope
    gamma: tuple[int, ...]
    zeta: tuple[tuple[Fraction, ...], ...]
    c0: tuple[Fraction, ...]

    @classmethod
    def from_data(cls, polytope: Polytope, gamma, zeta, c0) -> "FlowProblem":
        g = tuple(int(x) for x in gamma)
        z = tuple(tuple(linalg.frac(x) for x in row) for row in zeta)
        c = tuple(linalg.frac(x) for x in c0)
        if len(z) != len(c):
            raise ConfigError("zeta and c0 length mismatch")
        if len(g) != polytope.m:
            raise ConfigError("gamma dimension mismatch")
        return cls(polytope=polytope, gamma=g, zeta=z, c0=c)

    @property
    def n(self) -> int:
        return len(self.zeta)

    def speeds(self) -> tuple[Fraction, ...]:
        return tuple(linalg.dot([Fraction(x) for x in self.gamma], list(z)) for z in self.zeta)

    def c_of_tau(self, tau) -> tuple[Fraction, ...]:
        t = linalg.frac(tau)
        return tuple(c - s * t for c, s in zip(self.c0, self.speeds()))


@dataclass(frozen=True)
class FlowEvent:
    tau: Fraction
    kind: str
    face: frozenset[int] | None
    point: tuple[Fraction, ...] | None
    faces: tuple[frozenset[int], ...] = ()


@dataclass(frozen=True)
class FlowTimeline:
    speed: tuple[Fraction, ...]
    events: tuple[FlowEvent, ...]
    tau_lo: Fraction | None  # closed feasibility bound; None = unbounded
    tau_hi: Fraction | None
    stationary: bool

    def interval(self) -> tuple[Fraction | None, Fraction | None]:
        """Open interval on which the slice meets the interior."""
        return (self.tau_lo, self.tau_hi)

    def event_taus(self) -> tuple[Fraction, ...]:
        return tuple(e.tau for e in self.events)


def _lifted_rows(problem: FlowProblem):
    """Constraint rows in the (y, tau) variables."""
    p = problem.polytope
    speeds = problem.speeds()
    eq = []
    for z, c, s in zip(problem.zeta, problem.c0, speeds):
        eq.append(([Fraction(x) for x in z] + [s], Fraction(c)))
    ineq = [([Fraction(x) for x in lam] + [Fraction(0)], kap) for lam, kap in p.facets]
    return eq, ineq


def _tau_range(problem, extra_eq=()):
    """Exact min/max of tau over the lifted system (None = unbounded)."""
    p = problem.polytope
    eq, ineq = _lifted_rows(problem)
    eq = eq + [([Fraction(x) for x in row] + [Fraction(0)], rhs) for row, rhs in extra_eq]
    obj = [Fraction(0)] * p.m + [Fraction(1)]
    out = []
    pts = []
    for mx in (False, True):
        res = exactlp.solve_lp(p.m + 1, obj, eq=eq, ineq=ineq, maximize=mx)
        if res.status == exactlp.INFEASIBLE:
            return None
        if res.status == exactlp.UNBOUNDED:
            out.append(None)
            pts.append(None)
        else:
            out.append(res.value)
            pts.append(tuple(res.point[: p.m]))
    return out[0], out[1], pts[0], pts[1]


def timeline(problem: FlowProblem) -> FlowTimeline:
    """Full event history of the moving slice.

    Singular crossings come from the tau-intervals on which the slice
    meets each singular face; combinatorial changes from per-facet touch
    intervals; extinction from the supremum of interior contact.
    """
    p = problem.polytope
    speeds = problem.speeds()
    if all(s == 0 for s in speeds):
        return FlowTimeline(speed=speeds, events=(), tau_lo=None, tau_hi=None, stationary=True)

    rng = _tau_range(problem)
    if rng is None:
        raise ConfigError("slice is empty for every tau; flow is vacuous")
    tau_lo, tau_hi, pt_lo, pt_hi = rng

    zrows = [list(z) for z in problem.zeta]
    singular_faces = [f for f in proper_faces(p) if not zeta_regular(p, zrows, active=f.active).regular]

    # tau -> {kind -> payload}; singular hits and facet-set changes merge per tau
    singular_hits: dict[Fraction, list[tuple[FaceDescriptor, tuple[Fraction, ...]]]] = {}
    for f in singular_faces:
        extra = [([Fraction(x) for x in p.lam(i)], p.kap(i)) for i in sorted(f.active)]
        rng_f = _tau_range(problem, extra_eq=extra)
        if rng_f is None:
            continue
        lo, hi, plo, phi = rng_f
        for tau, pt in ((lo, plo), (hi, phi)):
            if tau is None:
                continue
            singular_hits.setdefault(tau, []).append((f, pt))

    touch_changes: dict[Fraction, set[int]] = {}
    for i in range(1, p.d + 1):
        extra = [([Fraction(x) for x in p.lam(i)], p.kap(i))]
        rng_i = _tau_range(problem, extra_eq=extra)
        if rng_i is None:
            continue
        lo, hi, _, _ = rng_i
        for tau in (lo, hi):
            if tau is None:
                continue
            touch_changes.setdefault(tau, set()).add(i)

    events: list[FlowEvent] = []
    taus = set(singular_hits) | set(touch_changes)
    if tau_hi is not None:
        taus.add(tau_hi)
    for tau in sorted(taus):
        if tau_lo is not None and tau < tau_lo:
            continue
        if tau_hi is not None and tau > tau_hi:
            continue
        if tau_hi is not None and tau == tau_hi:
            hits = singular_hits.get(tau, [])
            point = hits[0][1] if hits else pt_hi
            faces = tuple(sorted((f.active for f, _ in hits), key=sorted))
            events.append(FlowEvent(tau=tau, kind=EXTINCTION, face=faces[0] if faces else None,
                                    point=point, faces=faces))
            continue
        if tau in singular_hits:
            hits = sorted(singular_hits[tau], key=lambda fp: (fp[0].dim, tuple(sorted(fp[0].active))))
            faces = tuple(f.active for f, _ in hits)
            events.append(FlowEvent(tau=tau, kind=SINGULAR_CROSSING, face=faces[0],
                                    point=hits[0][1], faces=faces))
        elif tau in touch_changes:
            fs = frozenset(touch_changes[tau])
            events.append(FlowEvent(tau=tau, kind=COMBINATORIAL_CHANGE, face=fs, point=None,
                                    faces=(fs,)))
    events.sort(key=lambda e: e.tau)
    return FlowTimeline(speed=speeds, events=tuple(events), tau_lo=tau_lo, tau_hi=tau_hi,
                        stationary=False)


@dataclass(frozen=True)
class Snapshot:
    tau: Fraction
    slice: SlicePolyhedron
    regularity: RegularitySummary
    is_event: bool


def snapshot(problem: FlowProblem, tau, tl: FlowTimeline | None = None, box=None) -> Snapshot:
    """Slice at time tau with its regularity certificate."""
    t = linalg.frac(tau)
    if tl is None:
        tl = timeline(problem)
    if (tl.tau_lo is not None and t < tl.tau_lo) or (tl.tau_hi is not None and t > tl.tau_hi):
        raise OutsideInterval(f"tau={t} outside [{tl.tau_lo}, {tl.tau_hi}]")
    s = slice_polytope(problem.polytope, [list(z) for z in problem.zeta], problem.c_of_tau(t), box=box)
    reg = slice_regularity(s)
    return Snapshot(tau=t, slice=s, regularity=reg, is_event=t in tl.event_taus())
