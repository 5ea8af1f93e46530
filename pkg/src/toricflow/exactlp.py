"""Exact linear programming over the rationals.

Two-phase dense simplex with Bland's rule, so every answer (feasibility,
optimum, witness point) is an exact Fraction and termination is
guaranteed.  Variables are free; they are split into positive parts
internally.  Sized for desk-scale polytope work, not bulk LP.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

Row = list[Fraction]

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPResult:
    status: str
    value: Fraction | None
    point: list[Fraction] | None  # in the original free variables


def _pivot(t: list[Row], basis: list[int], r: int, c: int) -> None:
    piv = t[r][c]
    t[r] = [x / piv for x in t[r]]
    row_r = t[r]
    for i, row in enumerate(t):
        if i != r and row[c] != 0:
            f = row[c]
            t[i] = [x - f * y for x, y in zip(row, row_r)]
    basis[r] = c


def _run(t: list[Row], basis: list[int], ncols: int) -> str:
    """Maximize with cost row t[-1] holding reduced costs z_j - c_j."""
    while True:
        cost = t[-1]
        enter = next((j for j in range(ncols) if cost[j] < 0), None)
        if enter is None:
            return OPTIMAL
        leave = None
        best: Fraction | None = None
        for i in range(len(t) - 1):
            a = t[i][enter]
            if a > 0:
                ratio = t[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    best, leave = ratio, i
        if leave is None:
            return UNBOUNDED
        _pivot(t, basis, leave, enter)


def solve_lp(
    nvars: int,
    objective: list[Fraction] | None,
    eq: list[tuple[list[Fraction], Fraction]] = (),
    ineq: list[tuple[list[Fraction], Fraction]] = (),
    maximize: bool = True,
) -> LPResult:
    """Optimize objective . y over {eq rows: a.y = b, ineq rows: a.y >= b}.

    With objective None only feasibility is decided (value 0 on success).
    On UNBOUNDED the returned point is still feasible.
    """
    obj = [Fraction(0)] * nvars if objective is None else [Fraction(x) for x in objective]
    if not maximize:
        obj = [-x for x in obj]
    nslack = len(ineq)
    # columns: u (nvars) | w (nvars) | slack (nslack)
    ncols = 2 * nvars + nslack
    rows: list[Row] = []
    rhs: list[Fraction] = []
    for a, b in eq:
        rows.append([Fraction(x) for x in a] + [-Fraction(x) for x in a] + [Fraction(0)] * nslack)
        rhs.append(Fraction(b))
    for k, (a, b) in enumerate(ineq):
        s = [Fraction(0)] * nslack
        s[k] = Fraction(-1)
        rows.append([Fraction(x) for x in a] + [-Fraction(x) for x in a] + s)
        rhs.append(Fraction(b))
    nrows = len(rows)
    for i in range(nrows):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]

    # phase 1: artificial basis, maximize -(sum of artificials)
    t: list[Row] = []
    for i in range(nrows):
        art = [Fraction(0)] * nrows
        art[i] = Fraction(1)
        t.append(rows[i] + art + [rhs[i]])
    cost = [Fraction(0)] * (ncols + nrows + 1)
    for j in range(ncols):
        cost[j] = -sum(t[i][j] for i in range(nrows))
    cost[-1] = -sum(rhs)
    t.append(cost)
    basis = [ncols + i for i in range(nrows)]
    _run(t, basis, ncols + nrows)
    if t[-1][-1] != 0:
        return LPResult(INFEASIBLE, None, None)
    # drive leftover artificials out of the basis, dropping redundant rows
    drop: list[int] = []
    for i in range(nrows):
        if basis[i] >= ncols:
            c = next((j for j in range(ncols) if t[i][j] != 0), None)
            if c is None:
                drop.append(i)
            else:
                _pivot(t, basis, i, c)
    if drop:
        t = [row for i, row in enumerate(t) if i not in drop]
        basis = [b for i, b in enumerate(basis) if i not in drop]

    # phase 2 on the real columns
    t = [row[:ncols] + [row[-1]] for row in t[:-1]]
    full_obj = obj + [-x for x in obj] + [Fraction(0)] * nslack
    cost = [Fraction(0)] * (ncols + 1)
    for j in range(ncols + 1):
        cost[j] = sum(full_obj[basis[i]] * t[i][j] for i in range(len(t)))
    for j in range(ncols):
        cost[j] -= full_obj[j]
    t.append(cost)
    status = _run(t, basis, ncols)

    x = [Fraction(0)] * ncols
    for i in range(len(t) - 1):
        x[basis[i]] = t[i][-1]
    point = [x[j] - x[nvars + j] for j in range(nvars)]
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED, None, point)
    value = t[-1][-1] if maximize else -t[-1][-1]
    return LPResult(OPTIMAL, value, point)


def feasible_point(
    nvars: int,
    eq: list[tuple[list[Fraction], Fraction]] = (),
    ineq: list[tuple[list[Fraction], Fraction]] = (),
) -> list[Fraction] | None:
    res = solve_lp(nvars, None, eq=eq, ineq=ineq)
    return res.point if res.status == OPTIMAL else None
