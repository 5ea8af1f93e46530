"""Command-line interface: config parsing, subcommand dispatch, reports.

Subcommands: check | flow | topology | verify | render.
Configs are JSON or TOML (picked by extension); every exact-path number
is an int or a "p/q" string, floats there are rejected so no precision
is silently lost.  Reports are JSON with stable key order; exact values
are emitted as fraction strings and times also as symbolic multiples of
1/(2*pi).  Exit codes: 0 pass, 1 tolerance failure, 2 configuration
error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import chart as chart_mod
from . import flow as flow_mod
from . import lattice, polytope, realform
from .errors import ConfigError, EmptyInterior, ToricflowError
from .potentials import make_potential
from .render import fmt_frac, fmt_time, panel_times, render_flow_svg

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_CONFIG = 2


@dataclass
class ProblemConfig:
    polytope: polytope.Polytope
    zeta: list[list[Fraction]]
    c: list[Fraction]
    options: dict


def _exact(value, where: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise ConfigError(f"{where}: exact field needs an int or 'p/q' string, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as e:
            raise ConfigError(f"{where}: cannot parse rational {value!r}") from e
    raise ConfigError(f"{where}: unsupported value {value!r}")


def load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_bytes()
    if p.suffix.lower() == ".toml":
        try:
            import tomllib  # py311+
        except ModuleNotFoundError:
            import tomli as tomllib
        try:
            return tomllib.loads(text.decode())
        except Exception as e:
            raise ConfigError(f"TOML parse error in {path}: {e}") from e
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON parse error in {path} line {e.lineno}: {e.msg}") from e


def parse_problem(cfg: dict) -> ProblemConfig:
    try:
        m = cfg["m"]
        facets_raw = cfg["facets"]
    except KeyError as e:
        raise ConfigError(f"missing required field {e}") from e
    if not isinstance(m, int) or m < 1:
        raise ConfigError(f"m must be a positive integer, got {m!r}")
    facets = []
    for k, f in enumerate(facets_raw, start=1):
        lam = f["lambda"] if isinstance(f, dict) else f[0]
        kap = f.get("kappa", 0) if isinstance(f, dict) else f[1]
        if any(isinstance(x, float) for x in lam):
            raise ConfigError(f"facet {k}: lambda entries must be integers")
        facets.append((tuple(int(x) for x in lam), _exact(kap, f"facet {k} kappa")))
    removed = cfg.get("removed_faces", [])
    poly = polytope.Polytope.from_data(m, facets, removed_faces=removed)
    zeta = []
    for i, row in enumerate(cfg.get("zeta", []), start=1):
        zeta.append([_exact(x, f"zeta[{i}]") for x in row])
        if len(zeta[-1]) != m:
            raise ConfigError(f"zeta[{i}] has length {len(zeta[-1])}, expected {m}")
    c = [_exact(x, f"c[{i}]") for i, x in enumerate(cfg.get("c", []), start=1)]
    if len(c) != len(zeta):
        raise ConfigError(f"zeta has {len(zeta)} rows but c has {len(c)} entries")
    options = dict(cfg.get("options", {}))
    return ProblemConfig(polytope=poly, zeta=zeta, c=c, options=options)


def _opt(pc: ProblemConfig, args, name: str, default):
    if getattr(args, name, None) is not None:
        return getattr(args, name)
    return pc.options.get(name, default)


def _json_frac_list(v) -> list[str]:
    return [fmt_frac(x) for x in v]


def _event_json(e: flow_mod.FlowEvent) -> dict:
    out = {
        "tau": fmt_frac(e.tau),
        "t": fmt_time(e.tau),
        "kind": e.kind,
        "face": sorted(e.face) if e.face is not None else None,
    }
    if e.point is not None:
        out["point"] = _json_frac_list(e.point)
    return out


def _gamma_or_fail(pc: ProblemConfig):
    cy = polytope.cy_vector(pc.polytope)
    if cy is None:
        raise ConfigError("polytope admits no integer vector pairing to 1 with all facet normals")
    return cy


def cmd_check(pc: ProblemConfig, args) -> tuple[dict, int]:
    report: dict = {"command": "check"}
    failures: list[str] = []
    try:
        val = polytope.validate(pc.polytope)
        report["polytope"] = {
            "m": pc.polytope.m,
            "facets": pc.polytope.d,
            "bounded": val.bounded,
            "simple": val.simple,
            "warnings": list(val.warnings),
        }
    except EmptyInterior as e:
        raise ConfigError(f"invalid polytope: {e}") from e
    cy = polytope.cy_vector(pc.polytope)
    report["gamma"] = list(cy.gamma) if cy else None
    report["gamma_unique"] = cy.unique if cy else None
    if cy is None:
        failures.append("no integer CY vector")
    sp = lattice.special_condition([list(r) for r in pc.zeta], m=pc.polytope.m)
    report["special"] = {
        "is_special": sp.is_special,
        "k_zeta_order": sp.k_zeta_order,
        "index": sp.index,
        "saturation": [list(v) for v in sp.saturation.vectors] if sp.saturation else [],
    }
    if cy:
        speeds = [sum(Fraction(g) * z for g, z in zip(cy.gamma, row)) for row in pc.zeta]
        report["speed"] = _json_frac_list(speeds)
        report["stationary"] = all(s == 0 for s in speeds)
        if report["stationary"] and pc.zeta:
            report["note"] = "slicing pairs to zero with gamma: stationary phase-calibrated case"
    s = polytope.slice_polytope(pc.polytope, pc.zeta, pc.c)
    reg = polytope.slice_regularity(s)
    report["slice_t0"] = {
        "feasible": s.feasible,
        "meets_interior": s.meets_interior,
        "touched": sorted(s.touched),
        "bounded": s.bounded,
        "regular": reg.regular,
        "vertices": len(s.vertices()) if s.feasible and s.bounded else None,
    }
    if not s.feasible:
        failures.append("initial slice infeasible")
    report["summary"] = {"pass": not failures, "failures": failures}
    return report, EXIT_OK if not failures else EXIT_TOLERANCE


def _interval_segments(tl: flow_mod.FlowTimeline):
    start = tl.tau_lo if tl.tau_lo is not None else Fraction(0)
    stops = sorted({e.tau for e in tl.events if e.tau > start})
    segs = []
    prev = start
    for s in stops:
        if s > prev:
            segs.append((prev, s))
        prev = s
    return segs


def cmd_flow(pc: ProblemConfig, args) -> tuple[dict, int]:
    cy = _gamma_or_fail(pc)
    problem = flow_mod.FlowProblem.from_data(pc.polytope, cy.gamma, pc.zeta, pc.c)
    tl = flow_mod.timeline(problem)
    report: dict = {
        "command": "flow",
        "gamma": list(cy.gamma),
        "speed": _json_frac_list(tl.speed),
        "stationary": tl.stationary,
        "interval": {
            "tau_lo": None if tl.tau_lo is None else fmt_frac(tl.tau_lo),
            "tau_hi": None if tl.tau_hi is None else fmt_frac(tl.tau_hi),
            "t_hi": None if tl.tau_hi is None else fmt_time(tl.tau_hi),
            "eternal_backward": tl.tau_lo is None,
        },
        "events": [_event_json(e) for e in tl.events],
    }
    if tl.stationary:
        report["note"] = "all speeds vanish: stationary solution, no events"
        report["summary"] = {"pass": True, "failures": []}
        return report, EXIT_OK
    intervals = []
    special = lattice.special_condition([list(r) for r in pc.zeta], m=pc.polytope.m)
    for lo, hi in _interval_segments(tl):
        mid = (lo + hi) / 2
        snap = flow_mod.snapshot(problem, mid, tl)
        entry: dict = {
            "from": fmt_frac(lo),
            "to": fmt_frac(hi),
            "sample_tau": fmt_frac(mid),
            "touched": sorted(snap.slice.touched),
            "regular": snap.regularity.regular,
        }
        if snap.slice.bounded and snap.regularity.regular:
            g = realform.glue(snap.slice)
            t = realform.topology(g)
            entry["topology"] = {
                "cells": list(t.cell_counts),
                "components": t.components,
                "euler": t.euler,
                "orientable": t.orientable,
                "surface": t.surface_type,
            }
            entry["total_space"] = realform.total_space(t, special)
        intervals.append(entry)
    report["intervals"] = intervals
    if getattr(args, "svg", None):
        taus = panel_times(tl)
        svg = render_flow_svg(problem, tl, taus)
        Path(args.svg).write_text(svg)
        report["svg"] = {"path": args.svg, "panels": len(taus)}
    report["summary"] = {"pass": True, "failures": []}
    return report, EXIT_OK


def cmd_topology(pc: ProblemConfig, args) -> tuple[dict, int]:
    cy = _gamma_or_fail(pc)
    problem = flow_mod.FlowProblem.from_data(pc.polytope, cy.gamma, pc.zeta, pc.c)
    tau = Fraction(args.tau) if args.tau is not None else Fraction(0)
    tl = flow_mod.timeline(problem)
    snap = flow_mod.snapshot(problem, tau, tl)
    g = realform.glue(snap.slice)
    t = realform.topology(g)
    special = lattice.special_condition([list(r) for r in pc.zeta], m=pc.polytope.m)
    report = {
        "command": "topology",
        "tau": fmt_frac(tau),
        "t": fmt_time(tau),
        "components": t.components,
        "euler": t.euler,
        "orientable": t.orientable,
        "surface": t.surface_type,
        "total_space": realform.total_space(t, special),
        "cells": list(t.cell_counts),
        "betti_mod2": list(t.betti_mod2),
        "is_event": snap.is_event,
    }
    report["summary"] = {"pass": True, "failures": []}
    return report, EXIT_OK


def _float_rows(rows) -> list[list[float]]:
    return [[float(x) for x in row] for row in rows]


def cmd_verify(pc: ProblemConfig, args) -> tuple[dict, int]:
    cy = _gamma_or_fail(pc)
    samples_n = int(_opt(pc, args, "samples", 200))
    seed = int(_opt(pc, args, "seed", 42))
    tol_scale = float(_opt(pc, args, "tol", 1.0))
    negative = bool(pc.options.get("negative_control", False))
    potential = make_potential(pc.options.get("potential", "flat"), pc.polytope.m)
    ch = chart_mod.TorusChart(potential, cy.gamma)
    zeta = _float_rows(pc.zeta)
    c = [float(x) for x in pc.c]

    checks: list[dict] = []
    failures: list[str] = []

    def record(name: str, value: float, tol: float, note: str = ""):
        ok = bool(float(value) < tol)
        checks.append({"identity": name, "max_residual": float(value), "tol": tol, "pass": ok,
                       **({"note": note} if note else {})})
        if not ok:
            failures.append(name)

    samples = chart_mod.sample_level_set(ch, zeta, c, samples_n, seed=seed)
    if negative:
        samples = [chart_mod.perturbed(s, 0.1, seed=i) for i, s in enumerate(samples)]

    record("lagrangian_residual",
           max(chart_mod.lagrangian_residual(s) for s in samples), 1e-8 * tol_scale,
           note="perturbed negative control active" if negative else "")
    record("metric_splitting",
           max(chart_mod.splitting_residual(s) for s in samples), 1e-8 * tol_scale)
    record("angle_closed_vs_pullback",
           max(chart_mod.angle_gap_mod_pi(chart_mod.lagrangian_angle(s, "closed"),
                                          chart_mod.lagrangian_angle(s, "pullback"))
               for s in samples), 1e-6 * tol_scale)

    few = samples[: min(4, len(samples))]
    kres = 0.0
    for s in few:
        patch = chart_mod.level_set_patch(ch, s)
        kres = max(kres, chart_mod.psi_and_K(patch).residual)
    record("generalized_curvature_vs_angle_gradient", kres, 1e-3 * tol_scale)

    lres = 0.0
    for s in few:
        patch = chart_mod.level_set_patch(ch, s)
        lres = max(lres, abs(chart_mod.weighted_laplacian_theta(patch)))
    record("weighted_laplacian_theta", lres, 1e-3 * tol_scale)

    if pc.zeta:
        fres_t = fres_s = 0.0
        for s in few:
            fr = chart_mod.flow_residual(s, cy.gamma)
            scale = max(abs(t) for t in fr.targets) or 1.0
            fres_t = max(fres_t, fr.tangential / scale)
            fres_s = max(fres_s, fr.span / scale)
        record("flow_law_tangential", fres_t, 1e-3 * tol_scale)
        record("flow_law_span", fres_s, 1e-3 * tol_scale)

    s0 = samples[0]
    patch0 = chart_mod.level_set_patch(ch, s0)
    r = 0.5
    fv = chart_mod.first_variation_check(
        patch0, lambda u: _bump(u, r), radius=r,
        npts=int(_opt(pc, args, "fv_npts", 17)))
    sup = max(fv.h0_sup, 1e-12)
    record("first_variation_lhs", abs(fv.lhs) / sup, 1e-3 * tol_scale)
    record("first_variation_rhs", abs(fv.rhs) / sup, 1e-3 * tol_scale)

    report = {
        "command": "verify",
        "gamma": list(cy.gamma),
        "samples": samples_n,
        "seed": seed,
        "negative_control": negative,
        "checks": checks,
        "summary": {"pass": not failures, "failures": failures},
    }
    return report, EXIT_OK if not failures else EXIT_TOLERANCE


def _bump(u, r: float) -> float:
    out = 1.0
    for t in u:
        out *= chart_mod.smooth_bump(float(t) / r)
    return out


def cmd_render(pc: ProblemConfig, args) -> tuple[dict, int]:
    cy = _gamma_or_fail(pc)
    problem = flow_mod.FlowProblem.from_data(pc.polytope, cy.gamma, pc.zeta, pc.c)
    tl = flow_mod.timeline(problem)
    taus = [Fraction(args.tau)] if args.tau is not None else panel_times(tl)
    svg = render_flow_svg(problem, tl, taus)
    out = args.svg or "flow.svg"
    Path(out).write_text(svg)
    report = {
        "command": "render",
        "svg": {"path": out, "panels": len(taus), "taus": [fmt_frac(t) for t in taus]},
        "summary": {"pass": True, "failures": []},
    }
    return report, EXIT_OK


COMMANDS = {
    "check": cmd_check,
    "flow": cmd_flow,
    "topology": cmd_topology,
    "verify": cmd_verify,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="toricflow",
        description="Exact polytope-slice flows and numeric identity checks "
                    "for torus-invariant Lagrangians.",
    )
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON or TOML problem file")
        sp.add_argument("--out", help="write the JSON report here instead of stdout")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--samples", type=int, default=None)
        sp.add_argument("--tol", type=float, default=None,
                        help="multiplier on the per-identity default tolerances")
        sp.add_argument("--svg", help="SVG output path (flow/render)")
        sp.add_argument("--tau", help="time as a rational p/q (topology/render)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        pc = parse_problem(cfg)
        report, code = COMMANDS[args.command](pc, args)
    except ConfigError as e:
        print(json.dumps({"error": str(e), "kind": "config"}), file=sys.stderr)
        return EXIT_CONFIG
    except ToricflowError as e:
        print(json.dumps({"error": str(e), "kind": type(e).__name__}), file=sys.stderr)
        return EXIT_TOLERANCE
    text = json.dumps(report, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
