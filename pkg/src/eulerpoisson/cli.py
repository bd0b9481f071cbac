"""Command-line front end emitting reproducible CSV/JSON artifacts.

Commands: emden (scale-factor orbit data), liouville (radial profile and
mass-identity bracket), fields (sampled spacetime fields of a family),
period (two-way period comparison), verify (residual convergence bundle).

Artifacts are byte-identical for identical configuration and version:
numbers are written with 17 significant digits, JSON keys are sorted, line
endings are '\\n', and nothing volatile (wall time, paths, timestamps) goes
into an output file.  Wall time is logged to stderr.

Exit codes: 0 success, 1 usage error, 2 domain/range error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, emden, fields, goldreich_weber, liouville, residuals
from .errors import (
    DomainError,
    IntegrationHalted,
    NoCompactSupport,
    NoConvergence,
    NotPeriodic,
    OutOfRange,
    OutsideRegion,
)
from .ode import IntegratorConfig

_DOMAIN_ERRORS = (
    DomainError,
    OutOfRange,
    OutsideRegion,
    NotPeriodic,
    NoCompactSupport,
    NoConvergence,
    IntegrationHalted,
)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, obj) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _outdir(args) -> Path:
    out = args.outdir or os.environ.get("EULERPOISSON_OUTDIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _integrator_config(args, base: IntegratorConfig | None) -> IntegratorConfig | None:
    """Override only the fields the user supplied; None keeps module defaults."""
    overrides = {}
    for name in ("rtol", "atol", "h_init", "h_max", "max_steps"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    if not overrides:
        return base
    return dataclasses.replace(base or IntegratorConfig(), **overrides)


# ----------------------------------------------------------------------
# argument parsing
# ----------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_common(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--config", help="key=value file; flags override file values")
    sp.add_argument("--outdir", help="output directory (default: . or $EULERPOISSON_OUTDIR)")
    sp.add_argument("--rtol", type=float, help="integrator relative tolerance")
    sp.add_argument("--atol", type=float, help="integrator absolute tolerance")
    sp.add_argument("--h-init", dest="h_init", type=float, help="initial step")
    sp.add_argument("--h-max", dest="h_max", type=float, help="maximum step")
    sp.add_argument("--max-steps", dest="max_steps", type=int, help="step budget")


def build_parser() -> tuple[_Parser, dict[str, argparse.ArgumentParser]]:
    parser = _Parser(prog="eulerpoisson", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    # defaults reproduce the rotating-orbit example configuration
    p = sub.add_parser("emden", help="integrate the scale factor, emit orbit CSV")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--t-end", dest="t_end", type=float, default=50.0)
    p.add_argument("--samples", type=int, default=1001)
    _add_common(p)
    p.set_defaults(func=cmd_emden)
    subparsers["emden"] = p

    p = sub.add_parser("liouville", help="solve the radial profile, emit CSV")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--s-max", dest="s_max", type=float, default=20.0)
    _add_common(p)
    p.set_defaults(func=cmd_liouville)
    subparsers["liouville"] = p

    p = sub.add_parser("fields", help="sample spacetime fields of a family")
    p.add_argument(
        "--family",
        choices=["rotational", "yuen", "zz-inner", "zz-outer", "gw"],
        default="rotational",
    )
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--a1", type=float, default=1.0)
    p.add_argument("--rho0", type=float, default=0.5, help="outer density (zz families)")
    p.add_argument("--N", type=int, default=3, help="dimension (gw family)")
    p.add_argument("--t0", type=float, default=0.5)
    p.add_argument("--t1", type=float, default=2.0)
    p.add_argument("--nt", type=int, default=3)
    p.add_argument("--rmax", type=float, default=2.0, help="disk radius of the xy grid")
    p.add_argument("--nx", type=int, default=9)
    p.add_argument("--ny", type=int, default=9)
    _add_common(p)
    p.set_defaults(func=cmd_fields)
    subparsers["fields"] = p

    p = sub.add_parser("period", help="compare quadrature and simulation periods")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--xi", type=float, default=1.0)
    p.add_argument("--a0", type=float, default=1.0)
    p.add_argument("--a1", type=float, default=1.0)
    _add_common(p)
    p.set_defaults(func=cmd_period)
    subparsers["period"] = p

    p = sub.add_parser("verify", help="run the residual convergence bundle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--points", type=int, default=20)
    p.add_argument(
        "--h-list",
        dest="h_list",
        default="1e-2,5e-3,2.5e-3",
        help="comma-separated decreasing stencil steps",
    )
    p.add_argument(
        "--inject-corruption",
        action="store_true",
        help="self-test: corrupt the exact field and require the oracle to flag it",
    )
    p.add_argument(
        "--corruption-delta",
        dest="corruption_delta",
        type=float,
        default=0.01,
        help="density offset used by --inject-corruption",
    )
    _add_common(p)
    p.set_defaults(func=cmd_verify)
    subparsers["verify"] = p

    return parser, subparsers


def _load_config_file(path: str, sp: argparse.ArgumentParser) -> dict:
    """Parse KEY=VALUE lines, validating keys against the subcommand's options."""
    actions = {
        a.dest: a
        for a in sp._actions
        if a.dest not in ("help", "config") and a.option_strings
    }
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise _ConfigError(f"{path}:{lineno}: expected KEY=VALUE, got {raw!r}")
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key not in actions:
                raise _ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            action = actions[key]
            if isinstance(action, argparse._StoreTrueAction):
                values[key] = val.lower() in ("1", "true", "yes")
            elif action.type is not None:
                values[key] = action.type(val)
            else:
                values[key] = val
    return values


class _ConfigError(Exception):
    pass


# ----------------------------------------------------------------------
# commands
# ----------------------------------------------------------------------


def cmd_emden(args) -> int:
    p = emden.EmdenParams(lam=args.lam, xi=args.xi, a0=args.a0, a1=args.a1)
    cfg = _integrator_config(args, IntegratorConfig())
    run = emden.integrate_scale(p, args.t_end, cfg)
    traj = run.trajectory

    rows = []
    for t in np.linspace(0.0, traj.t_end, args.samples):
        a, adot = traj.state_at(float(t))
        energy = adot * adot / 2 + emden.potential(float(a), p)
        rows.append((float(t), float(a), float(adot), energy))

    cls = emden.classify(p)
    report = {
        "command": "emden",
        "version": __version__,
        "params": {"lam": p.lam, "xi": p.xi, "a0": p.a0, "a1": p.a1, "t_end": args.t_end},
        "classification": cls.value,
        "theta": emden.energy_level(p),
        "abar": None,
        "a_min": None,
        "a_max": None,
        "T_quadrature": None,
        "T_simulation": None,
        "touchdown_time": run.touchdown_time,
    }
    if p.lam > 0 and p.xi != 0:
        report["abar"] = emden.equilibrium_radius(p)
    if cls is emden.OrbitClass.PERIODIC:
        tp = emden.turning_points(p)
        report["a_min"], report["a_max"] = tp.a_min, tp.a_max
        report["T_quadrature"] = emden.period_by_quadrature(p).T
        report["T_simulation"] = emden.period_by_simulation(p).T

    out = _outdir(args)
    _write_csv(out / "emden.csv", ["t", "a", "adot", "energy"], rows)
    _write_json(out / "emden_report.json", report)
    return 0


def cmd_liouville(args) -> int:
    p = liouville.LiouvilleParams(K=args.K, lam=args.lam, alpha=args.alpha)
    cfg = _integrator_config(args, None)
    prof = liouville.solve_profile(p, args.s_max, cfg)

    s = prof.grid
    mass = prof._mass_at_nodes()
    bracket = -p.lam * s + p.K * prof.fdot + mass / s
    rows = zip(s.tolist(), prof.f.tolist(), prof.fdot.tolist(), mass.tolist(), bracket.tolist())

    report = {
        "command": "liouville",
        "version": __version__,
        "params": {"K": p.K, "lam": p.lam, "alpha": p.alpha, "s_max": args.s_max},
        "n_nodes": int(prof.traj.n_nodes),
        "max_abs_bracket": float(np.max(np.abs(bracket))),
    }
    out = _outdir(args)
    _write_csv(out / "liouville.csv", ["s", "f", "fdot", "enclosed_mass", "bracket"], rows)
    _write_json(out / "liouville_report.json", report)
    return 0


def _fields_rows_rotational(args, xi: float):
    sol = fields.build_rotational(
        lam=args.lam, xi=xi, K=args.K, alpha=args.alpha,
        a0=args.a0, a1=args.a1, t_max=args.t1,
    )
    for t in np.linspace(args.t0, min(args.t1, sol.scale.t_end), args.nt):
        for x in np.linspace(-args.rmax, args.rmax, args.nx):
            for y in np.linspace(-args.rmax, args.rmax, args.ny):
                if math.hypot(x, y) > args.rmax:
                    continue
                try:
                    s = fields.eval_rotational(sol, float(t), float(x), float(y))
                except (OutOfRange, DomainError):
                    continue
                yield (float(t), float(x), float(y), s.rho, s.u1, s.u2, s.phi_r)


def _fields_rows_zz(args, inner: bool):
    zz = fields.ZZSolution(K=args.K, rho0=args.rho0)
    ev = fields.eval_zz_inner if inner else fields.eval_zz_outer
    for t in np.linspace(args.t0, args.t1, args.nt):
        for x in np.linspace(-args.rmax, args.rmax, args.nx):
            for y in np.linspace(-args.rmax, args.rmax, args.ny):
                if math.hypot(x, y) > args.rmax:
                    continue
                try:
                    s = ev(zz, float(t), float(x), float(y))
                except (OutsideRegion, DomainError):
                    continue
                yield (float(t), float(x), float(y), s.rho, s.u1, s.u2, s.phi_r)


def _fields_rows_gw(args):
    p = goldreich_weber.GWParams(
        N=args.N, K=args.K, lam=args.lam, alpha_center=args.alpha,
        a0=args.a0, a1=args.a1,
    )
    prof = goldreich_weber.solve_gw_profile(p)
    run = goldreich_weber.integrate_gw_scale(p, args.t1)
    traj = run.trajectory
    for t in np.linspace(args.t0, min(args.t1, traj.t_end), args.nt):
        a, adot = traj.state_at(float(t))
        for x in np.linspace(-args.rmax, args.rmax, args.nx):
            for y in np.linspace(-args.rmax, args.rmax, args.ny):
                r = math.hypot(x, y)
                if r > args.rmax:
                    continue
                try:
                    rho = goldreich_weber.gw_density(prof, float(a), r)
                except (NoCompactSupport, DomainError):
                    continue
                stretch = adot / a
                yield (float(t), float(x), float(y), rho, stretch * x, stretch * y, None)


def cmd_fields(args) -> int:
    if args.family == "rotational":
        rows = _fields_rows_rotational(args, xi=args.xi)
    elif args.family == "yuen":
        rows = _fields_rows_rotational(args, xi=0.0)
    elif args.family == "zz-inner":
        rows = _fields_rows_zz(args, inner=True)
    elif args.family == "zz-outer":
        rows = _fields_rows_zz(args, inner=False)
    else:
        rows = _fields_rows_gw(args)
    out = _outdir(args)
    _write_csv(out / "fields.csv", ["t", "x", "y", "rho", "u1", "u2", "phi_r"], rows)
    return 0


def cmd_period(args) -> int:
    p = emden.EmdenParams(lam=args.lam, xi=args.xi, a0=args.a0, a1=args.a1)
    cfg = _integrator_config(args, IntegratorConfig(rtol=1e-12, atol=1e-14))
    tq = emden.period_by_quadrature(p)
    ts = emden.period_by_simulation(p, cfg)
    report = {
        "command": "period",
        "version": __version__,
        "params": {"lam": p.lam, "xi": p.xi, "a0": p.a0, "a1": p.a1},
        "T_quadrature": tq.T,
        "T_simulation": ts.T,
        "rel_diff": abs(tq.T - ts.T) / tq.T,
    }
    _write_json(_outdir(args) / "period.json", report)
    return 0


def _study_check(name, expected_converges, study) -> dict:
    converges = residuals.study_passes(study)
    return {
        "name": name,
        "kind": "convergence",
        "expected": "converges" if expected_converges else "fails",
        "estimated_order": study.estimated_order,
        "norms": list(study.norms),
        "h_list": list(study.h_sequence),
        "at_floor": study.at_floor,
        "passed": converges == expected_converges,
    }


def cmd_verify(args) -> int:
    t_begin = time.perf_counter()
    h_list = [float(v) for v in args.h_list.split(",")]
    rng = np.random.default_rng(args.seed)
    checks: list[dict] = []

    # rotating isothermal family, all four equations
    sol = fields.build_rotational(lam=1.0, xi=1.0, K=1.0, alpha=0.0, a0=1.0, a1=1.0, t_max=2.5)
    rot = lambda t, x, y: fields.eval_rotational(sol, t, x, y)
    pts = []
    for _ in range(args.points):
        t = rng.uniform(0.1, 2.0)
        r = rng.uniform(0.2, 3.0)
        ang = rng.uniform(0.0, 2 * math.pi)
        pts.append((float(t), float(r * math.cos(ang)), float(r * math.sin(ang))))
    iso = residuals.PressureLaw("isothermal", K=1.0)
    mom_x = lambda f, p, c: residuals.momentum_residual(f, p, c, iso)[0]
    mom_y = lambda f, p, c: residuals.momentum_residual(f, p, c, iso)[1]
    checks.append(_study_check(
        "rotational/mass", True,
        residuals.convergence_study(residuals.mass_residual, rot, pts, h_list)))
    checks.append(_study_check(
        "rotational/momentum_x", True,
        residuals.convergence_study(mom_x, rot, pts, h_list)))
    checks.append(_study_check(
        "rotational/momentum_y", True,
        residuals.convergence_study(mom_y, rot, pts, h_list)))
    checks.append(_study_check(
        "rotational/poisson", True,
        residuals.convergence_study(residuals.poisson_residual, rot, pts, h_list)))

    # two-region spiral of the gamma=2 Euler equations
    zz = fields.ZZSolution(K=1.0, rho0=0.5)
    inner = lambda t, x, y: fields.eval_zz_inner(zz, t, x, y)
    inner_bad = lambda t, x, y: fields.eval_zz_inner(zz, t, x, y, as_printed=True)
    outer = lambda t, x, y: fields.eval_zz_outer(zz, t, x, y)
    g2 = residuals.PressureLaw("gamma2", K=zz.K)
    zmom_x = lambda f, p, c: residuals.momentum_residual(f, p, c, g2)[0]
    zmom_y = lambda f, p, c: residuals.momentum_residual(f, p, c, g2)[1]

    def disc_pts(r_lo, r_hi):
        out = []
        for _ in range(args.points):
            t = rng.uniform(1.0, 2.0)
            r = rng.uniform(r_lo, r_hi)
            ang = rng.uniform(0.0, 2 * math.pi)
            out.append((float(t), float(r * math.cos(ang)), float(r * math.sin(ang))))
        return out

    pts_in = disc_pts(0.2, 1.2)   # interface radius is 2t >= 2 here
    pts_out = disc_pts(5.0, 8.0)
    for name, expected, op, f, p in [
        ("zz_inner/mass", True, residuals.mass_residual, inner, pts_in),
        ("zz_inner/momentum_x", True, zmom_x, inner, pts_in),
        ("zz_inner/momentum_y", True, zmom_y, inner, pts_in),
        ("zz_outer/mass", True, residuals.mass_residual, outer, pts_out),
        ("zz_outer/momentum_x", True, zmom_x, outer, pts_out),
        ("zz_outer/momentum_y", True, zmom_y, outer, pts_out),
        ("zz_inner_as_printed/mass", False, residuals.mass_residual, inner_bad, pts_in),
    ]:
        checks.append(_study_check(name, expected, residuals.convergence_study(op, f, p, h_list)))

    # interface density continuity (exact algebra, checked numerically)
    diffs = []
    for t in (0.5, 1.0, 1.5, 2.0):
        ri = fields.zz_interface_radius(zz, t)
        s = fields.eval_zz_inner(zz, t, ri / math.sqrt(2), ri / math.sqrt(2))
        diffs.append(abs(s.rho - zz.rho0))
    checks.append({
        "name": "zz_interface_continuity",
        "kind": "equality",
        "max_abs_diff": max(diffs),
        "tol": 1e-12,
        "passed": max(diffs) <= 1e-12,
    })

    if args.inject_corruption:
        bad = residuals.corrupt_density_offset(rot, args.corruption_delta)
        checks.append(_study_check(
            "corrupted_rotational/mass", False,
            residuals.convergence_study(residuals.mass_residual, bad, pts, h_list)))
        checks.append(_study_check(
            "corrupted_rotational/momentum_x", False,
            residuals.convergence_study(mom_x, bad, pts, h_list)))
        checks.append(_study_check(
            "corrupted_rotational/poisson", False,
            residuals.convergence_study(residuals.poisson_residual, bad, pts, h_list)))

    all_passed = all(c["passed"] for c in checks)
    report = {
        "command": "verify",
        "version": __version__,
        "seed": args.seed,
        "n_points": args.points,
        "h_list": h_list,
        "inject_corruption": bool(args.inject_corruption),
        "checks": checks,
        "all_passed": all_passed,
    }
    _write_json(_outdir(args) / "verify.json", report)
    print(f"verify: {time.perf_counter() - t_begin:.2f}s wall", file=sys.stderr)
    for c in checks:
        status = "ok" if c["passed"] else "FAIL"
        print(f"  [{status}] {c['name']}", file=sys.stderr)
    return 0 if all_passed else 3


def main(argv=None) -> int:
    parser, subparsers = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if getattr(args, "config", None):
        try:
            overrides = _load_config_file(args.config, subparsers[args.command])
        except (_ConfigError, OSError) as exc:
            print(f"eulerpoisson: config error: {exc}", file=sys.stderr)
            return 1
        subparsers[args.command].set_defaults(**overrides)
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)

    t0 = time.perf_counter()
    try:
        code = args.func(args)
    except _DOMAIN_ERRORS as exc:
        print(f"eulerpoisson {args.command}: error: {exc}", file=sys.stderr)
        return 2
    print(f"{args.command}: {time.perf_counter() - t0:.2f}s wall", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
