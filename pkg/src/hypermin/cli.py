"""Command-line entry point: ``hypermin <subcommand> ...``.

Every subcommand prints a JSON document on stdout and, with ``--out``,
writes the same document (or CSV rows for tabular output) to a file.
Exit codes: 0 success, 2 INCONCLUSIVE certificate, 1 any error.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_ERROR, EXIT_INCONCLUSIVE = 0, 1, 2
MAX_LEVEL = 8
BASE_RINGS, BASE_SPOKES = 4, 32


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is reserved for INCONCLUSIVE
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0.0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _finite(text: str) -> float:
    v = float(text)
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text}")
    return v


def _level(text: str) -> int:
    v = int(text)
    if not 0 <= v <= MAX_LEVEL:
        raise argparse.ArgumentTypeError(f"refinement level must lie in [0, {MAX_LEVEL}]")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 2:
        raise argparse.ArgumentTypeError("need at least 2 points")
    return v


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays unwrapped, non-finite floats as strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def dumps(obj) -> str:
    # float repr is the shortest string that round-trips
    return json.dumps(_plain(obj), indent=2)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(v)) for v in row])


def _emit(args, doc: dict, table=None) -> None:
    """Print ``doc`` and mirror it to --out (CSV when asked for and tabular)."""
    text = dumps(doc)
    print(text)
    if args.out is None:
        return
    out = Path(args.out)
    as_csv = table is not None and (args.format == "csv" or (args.format is None and out.suffix == ".csv"))
    if as_csv:
        _write_csv(out, *table)
    else:
        out.write_text(text + "\n")


# -- subcommands --------------------------------------------------------------

def _cmd_geom_check(args) -> int:
    from .certify import FINITE, HOROSPHERE, DomainSpec
    from .hypgeo import INFINITE, SampledCurve, convexity_check, exterior_sphere_check, interior_sphere_check

    checks = []
    if args.spec:
        spec = DomainSpec.load(args.spec)
        R1 = spec.inner_radius
        for i, c in enumerate(spec.inners):
            checks.append((f"inner {i}: interior sphere, radius {R1!r}", interior_sphere_check(c, R1)))
        oc = spec.outer_condition
        if oc.kind == FINITE:
            checks.append((f"outer: exterior sphere, radius {oc.radius!r}", exterior_sphere_check(spec.outer, oc.radius)))
        elif oc.kind == HOROSPHERE:
            checks.append(("outer: exterior horosphere", exterior_sphere_check(spec.outer, INFINITE)))
        else:
            checks.append(("outer: convex", convexity_check(spec.outer)))
    else:
        if not args.curve or not args.predicate:
            raise UsageError("geom-check needs --spec, or --curve with --predicate")
        curve = SampledCurve.load(args.curve)
        if args.predicate == "convex":
            checks.append(("convex", convexity_check(curve)))
        else:
            R = INFINITE if args.radius is None else args.radius
            if args.predicate == "interior":
                if R == INFINITE:
                    raise UsageError("the interior check needs --radius")
                checks.append((f"interior sphere, radius {R!r}", interior_sphere_check(curve, R)))
            else:
                label = "horosphere" if R == INFINITE else f"radius {R!r}"
                checks.append((f"exterior sphere, {label}", exterior_sphere_check(curve, R)))
    doc = {
        "ok": all(r.ok for _, r in checks),
        "checks": [{"check": name, **res.summary()} for name, res in checks],
    }
    _emit(args, doc)
    return EXIT_OK


def _cmd_catenoid(args) -> int:
    from .catenoid import get_profile, half_height, height_cap

    if args.action == "height":
        _emit(args, {"n": args.n, "r": args.r, "half_height": half_height(args.n, args.r),
                     "cap": height_cap(args.n)})
        return EXIT_OK
    if args.rho_max is None or not args.rho_max > args.r:
        raise UsageError("catenoid profile needs --rho-max greater than --r")
    rho = np.linspace(args.r, args.rho_max, args.points)
    g = get_profile(args.n, args.r)(rho)
    rows = np.column_stack([rho, g])
    _emit(args, {"n": args.n, "r": args.r, "rho": rho, "g": g}, (["rho", "g"], rows))
    return EXIT_OK


def _cmd_horosurf(args) -> int:
    from .horosurf import HoroRegion

    S = HoroRegion(args.h).sample(args.grid, args.grid, args.theta_margin)
    doc = {"h": args.h, "grid": args.grid, "x": S[:, 0], "y": S[:, 1], "upsilon": S[:, 2]}
    _emit(args, doc, (["x", "y", "upsilon"], S))
    return EXIT_OK


def _boundary_data(args, spec):
    from .certify import BoundaryData

    if args.f:
        if spec is None:
            raise UsageError("--f needs --spec (values are attached to the outer samples)")
        return BoundaryData(args.h, BoundaryData.read_f(args.f), spec.outer)
    return BoundaryData(args.h)


def _cmd_certify(args) -> int:
    from .certify import DomainSpec, certify_theorem1, certify_theorem2

    spec = DomainSpec.load(args.spec)
    data = _boundary_data(args, spec)
    cert = certify_theorem2(spec, data) if data.sampled else certify_theorem1(spec, data)
    _emit(args, cert.to_json())
    return cert.exit_code


def _cmd_demo_nonexistence(args) -> int:
    from .certify import certify_nonexistence

    cert = certify_nonexistence(args.n, args.h)
    _emit(args, cert.to_json())
    return cert.exit_code


def _annulus_from_spec(spec):
    from .hypgeo import fit_circle, hyp_distance
    from .solver import MeshError

    if spec.n != 2 or len(spec.inners) != 1:
        raise MeshError("automatic meshing covers a single planar inner boundary; pass --mesh")
    inner, outer = fit_circle(spec.inners[0]), fit_circle(spec.outer)
    if inner is None or outer is None or hyp_distance(inner.hyp_center, outer.hyp_center) > 1e-6:
        raise MeshError("boundaries are not concentric circles; pass --mesh")
    return inner.hyp_radius, outer.hyp_radius, outer.hyp_center


def _domain(args):
    """(mesh, boundary data, spec or None, (r_in, r_out, center) or None)."""
    from .certify import DomainSpec
    from .solver import Mesh, annulus_mesh

    spec = DomainSpec.load(args.spec) if args.spec else None
    annulus = None
    if args.annulus:
        annulus = (args.annulus[0], args.annulus[1], np.asarray(args.center, dtype=float))
    elif spec is not None and not args.mesh:
        annulus = _annulus_from_spec(spec)
    if args.mesh:
        mesh = Mesh.load(args.mesh)
    elif annulus is not None:
        r_in, r_out, c = annulus
        k = 2 ** args.level
        mesh = annulus_mesh(r_in, r_out, BASE_RINGS * k, BASE_SPOKES * k, c, grading=args.grading)
    else:
        raise UsageError("give a domain: --spec, --annulus R_IN R_OUT, or --mesh")
    data = _boundary_data(args, spec)
    if args.outer_value is not None:
        if data.sampled:
            raise UsageError("--outer-value and --f are exclusive")
        values = data.values_at(mesh.vertices, mesh.tags)
        values[mesh.tags == "OUTER"] = args.outer_value
        data = values
    return mesh, data, spec, annulus


def _field_summary(field) -> dict:
    from .solver import residual_QH

    return {
        "mesh": field.mesh.stats(),
        "iterations": field.log.get("iterations"),
        "flux_residual": field.log.get("residual"),
        "residual_max": residual_QH(field).max_norm,
        "u_min": float(field.values.min()),
        "u_max": float(field.values.max()),
    }


def _cmd_solve(args) -> int:
    from .solver import SolveOptions, solve_dirichlet_2d, solve_radial

    mesh, data, spec, annulus = _domain(args)
    if args.radial:
        if annulus is None or args.mesh or args.f:
            raise UsageError("--radial needs an annulus domain with constant outer data")
        r_in, r_out, c = annulus
        outer = 0.0 if args.outer_value is None else args.outer_value
        sol = solve_radial(2, r_in, r_out, args.h, outer, c)
        _emit(args, {"radial": sol.to_json()})
        return EXIT_OK
    field = solve_dirichlet_2d(mesh, data, SolveOptions(tol=args.tol))
    doc = _field_summary(field)
    if args.field:
        doc["field_csv"] = str(args.field)
        doc["sidecar"] = str(field.write(args.field))
    _emit(args, doc)
    return EXIT_OK


def _cmd_verify(args) -> int:
    from .certify import BoundaryData, certify_theorem1
    from .solver import (
        SolveOptions, barrier_envelope, evaluate_boundary, perron_sweep, residual_QH,
        solve_dirichlet_2d, verify_max_principle,
    )

    mesh, data, spec, _ = _domain(args)
    opts = SolveOptions(tol=args.tol)
    field = solve_dirichlet_2d(mesh, data, opts)
    checks = set(args.checks.split(","))
    unknown = checks - {"residual", "max-principle", "perron", "barrier"}
    if unknown:
        raise UsageError(f"unknown checks: {sorted(unknown)}")
    report = {"solve": _field_summary(field)}
    ok = True
    if "residual" in checks:
        # the discrete equation must hold to the solve tolerance; the
        # recovered pointwise residual is reported but only decays with h
        weak = residual_QH(field, method="galerkin").max_norm
        report["residual"] = {"ok": weak <= args.tol, "discrete_max": weak, "tol": args.tol,
                              "recovered_max": report["solve"]["residual_max"]}
        ok &= weak <= args.tol
    if "max-principle" in checks:
        g = evaluate_boundary(mesh, data)
        lower = 0.5 * (g + g[mesh.boundary].min())
        u1 = solve_dirichlet_2d(mesh, lower, opts)
        rep = verify_max_principle(u1, field)
        report["max_principle"] = {"ok": rep.ok, "worst_violation": rep.worst_violation}
        ok &= rep.ok
    if "perron" in checks:
        u, log = perron_sweep(mesh, data, options=opts)
        diff = float(np.max(np.abs(u.values - field.values)))
        passed = log.monotone and diff <= 1e-5
        report["perron"] = {"ok": passed, "sweeps": log.sweeps, "monotone": log.monotone,
                            "max_difference": diff}
        ok &= passed
    if "barrier" in checks:
        if spec is None or isinstance(data, np.ndarray) or data.sampled:
            report["barrier"] = {"skipped": "needs --spec with zero outer data"}
        else:
            cert = certify_theorem1(spec, data)
            if cert.verdict != "EXISTS":
                report["barrier"] = {"skipped": f"certificate verdict {cert.verdict}"}
            else:
                rep = barrier_envelope(spec, data, field, per_curve=args.per_curve, certificate=cert)
                report["barrier"] = rep.to_json()
                ok &= rep.ok
    report["ok"] = bool(ok)
    _emit(args, report)
    return EXIT_OK if ok else EXIT_ERROR


# -- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--out", help="also write the result to this file")
    common.add_argument("--format", choices=["json", "csv"], help="file format for --out (default from suffix)")

    p = _Parser(prog="hypermin", description="Compact minimal vertical graphs in H^n x R.")
    p.add_argument("--version", action="version", version=f"hypermin {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("geom-check", parents=[common], help="boundary predicates")
    g.add_argument("--spec", help="domain spec JSON: run every check it declares")
    g.add_argument("--curve", help="sampled curve JSON")
    g.add_argument("--predicate", choices=["interior", "exterior", "convex"])
    g.add_argument("--radius", type=_positive, help="sphere radius (omit for a horosphere)")
    g.set_defaults(run=_cmd_geom_check)

    c = sub.add_parser("catenoid", parents=[common], help="catenoid profiles and heights")
    c.add_argument("action", choices=["profile", "height"])
    c.add_argument("--n", type=int, default=2)
    c.add_argument("--r", type=_positive, required=True, help="neck radius")
    c.add_argument("--rho-max", type=_positive)
    c.add_argument("--points", type=_count, default=200)
    c.set_defaults(run=_cmd_catenoid)

    hs = sub.add_parser("horosurf", parents=[common], help="samples of the horocycle surface")
    hs.add_argument("action", choices=["sample"])
    hs.add_argument("--h", type=float, required=True, help="band level in [0, pi/2)")
    hs.add_argument("--grid", type=_count, default=32)
    hs.add_argument("--theta-margin", type=float, default=0.6)
    hs.set_defaults(run=_cmd_horosurf)

    ce = sub.add_parser("certify", parents=[common], help="existence certificate")
    ce.add_argument("--spec", required=True)
    ce.add_argument("--h", type=_finite, required=True, help="height on the inner boundaries")
    ce.add_argument("--f", help="CSV of outer values, one per outer sample")
    ce.set_defaults(run=_cmd_certify)

    for name, fn, helptext in (("solve", _cmd_solve, "Dirichlet solve"),
                               ("verify", _cmd_verify, "solve, then run verification passes")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--spec")
        s.add_argument("--annulus", nargs=2, type=_positive, metavar=("R_IN", "R_OUT"))
        s.add_argument("--center", nargs=2, type=float, default=[0.0, 0.0], metavar=("X", "Y"))
        s.add_argument("--mesh", help="mesh JSON (vertices, triangles, boundary_tags)")
        s.add_argument("--level", type=_level, default=2, help=f"refinement level in [0, {MAX_LEVEL}]")
        s.add_argument("--grading", type=_positive, default=1.0)
        s.add_argument("--h", type=_finite, required=True)
        s.add_argument("--outer-value", type=_finite)
        s.add_argument("--f")
        s.add_argument("--tol", type=_positive, default=1e-8)
        if name == "solve":
            s.add_argument("--field", help="write the field as CSV plus a JSON sidecar")
            s.add_argument("--radial", action="store_true", help="exact rotational solution")
        else:
            s.add_argument("--checks", default="residual,max-principle,barrier",
                           help="comma list of residual, max-principle, perron, barrier")
            s.add_argument("--per-curve", type=int, default=32)
        s.set_defaults(run=fn)

    d = sub.add_parser("demo-nonexistence", parents=[common], help="non-existence certificate")
    d.add_argument("--n", type=int, default=2)
    d.add_argument("--h", type=_positive, required=True)
    d.set_defaults(run=_cmd_demo_nonexistence)
    return p


def _thread_limit():
    env = os.environ.get("HYPERMIN_THREADS")
    if not env:
        return nullcontext()
    from threadpoolctl import threadpool_limits

    n = int(env)
    if n < 1:
        raise UsageError("HYPERMIN_THREADS must be a positive integer")
    return threadpool_limits(limits=n)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        with _thread_limit():
            return args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, ArithmeticError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        out = getattr(locals().get("args"), "out", None)
        if out:
            Path(out).write_text(dumps({"error": str(exc), "type": type(exc).__name__}) + "\n")
    return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
