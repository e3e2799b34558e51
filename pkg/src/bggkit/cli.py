"""Command-line interface: bggkit <command> [geometry] [rep] [options]."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

from .catalog import EXAMPLE_NAMES, CatalogError, GeometryBundle, load_geometry
from .coords import (ExactExponentialError, ExpFactor, evaluate_solution, normal_coordinate_polynomial,
                     solution_expression)
from .expr import Polynomial
from .extension import curvature, normality_residual, normalize, regularity_check
from .field import ONE, Scalar
from .pipeline import CONNECTION_KINDS, PipelineError, build_connection, fixture_jobs, labelled, run_pipeline
from .solutions import s_chain


def _emit(args, data: dict, text: str) -> None:
    print(json.dumps(data, indent=2, sort_keys=True) if args.format == "json" else text)


def _bundle(args) -> GeometryBundle:
    if not args.geometry:
        raise CatalogError(f"a geometry is required; valid names: {', '.join(EXAMPLE_NAMES)}")
    return load_geometry(args.geometry)


def _rep_name(args, bundle: GeometryBundle) -> str:
    if not args.rep:
        raise CatalogError(f"a representation is required; available: {', '.join(bundle.rep_names)}")
    bundle.rep(args.rep)
    return args.rep


def cmd_validate(args) -> int:
    bundle = _bundle(args)
    checks = [(r.check, r.ok, r.detail) for r in bundle.validate()]
    checks.append(("normality", not normality_residual(bundle.alpha), ""))
    reg = regularity_check(bundle.alpha)
    checks.append(("regularity", reg.ok, reg.detail))
    ok = all(c[1] for c in checks)
    data = {"geometry": bundle.name, "checks": [{"check": c, "ok": o, "detail": d} for c, o, d in checks], "passed": ok}
    text = "\n".join(f"[{'PASS' if o else 'FAIL'}] {c}{': ' + d if d else ''}" for c, o, d in checks)
    _emit(args, data, text)
    return 0 if ok else 1


def cmd_normalize(args) -> int:
    bundle = _bundle(args)
    if bundle.gr_alpha is None:
        raise PipelineError("normalize", "the bundle stores no graded extension")
    family = normalize(bundle.gr_alpha, bundle.gauge)
    if family.particular is None:
        _emit(args, {"geometry": bundle.name, "passed": False}, "no normal extension under the gauge constraints")
        return 1
    ext = family.extension()
    normal = not normality_residual(ext)
    regular = regularity_check(ext).ok
    coords = bundle.coordinates
    table = [[str(p) for p in row] for row in _alpha_rows(ext, coords)]
    data = {
        "geometry": bundle.name,
        "family_dim": family.dim,
        "free_by_level": [list(x) for x in family.free_by_level],
        "particular_equals_stored": ext.alpha == bundle.alpha.alpha,
        "alpha": table,
        "normal": normal,
        "regular": regular,
        "passed": normal and regular,
    }
    text = "\n".join([f"normalization family dim: {family.dim}",
                      f"particular solution equals stored alpha: {data['particular_equals_stored']}",
                      f"normal: {normal}, regular: {regular}", "alpha:"] + ["  [" + ", ".join(r) + "]" for r in table])
    _emit(args, data, text)
    return 0 if data["passed"] else 1


def _alpha_rows(ext, coords):
    """alpha as a matrix of linear forms in the k coordinates."""
    g = ext.target
    total = None
    for j, name in enumerate(coords):
        m = g.to_matrix(ext.image(j))
        term = [[Polynomial.constant(m[r, c]) * Polynomial.variable(name) for c in range(m.ncols)] for r in range(m.nrows)]
        total = term if total is None else [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(total, term)]
    return total


def cmd_curvature(args) -> int:
    bundle = _bundle(args)
    kappa = curvature(bundle.alpha)
    names = bundle.k_data.algebra.names
    gnames = bundle.g_data.algebra.names
    entries = {f"{names[i]},{names[j]}": labelled(v, gnames) for (i, j), v in sorted(kappa.values.items()) if v}
    text = "\n".join(f"kappa({k}) = " + " + ".join(f"({c})*{n}" for n, c in v.items()) for k, v in entries.items())
    _emit(args, {"geometry": bundle.name, "kappa": entries}, text or "kappa = 0")
    return 0


def _connection(args, bundle):
    rep = bundle.rep(_rep_name(args, bundle))
    return build_connection(bundle, rep, args.connection)


def cmd_prolong(args) -> int:
    bundle = _bundle(args)
    args.connection = "prolongation"
    conn, report = _connection(args, bundle)
    labels = conn.rep.labels
    psi = {labels[i]: str(p) for i, p in enumerate(conn.psi_table(bundle.coordinates)) if not p.is_zero()}
    homog = conn.psi_homogeneity()
    data = {"geometry": bundle.name, "rep": args.rep, "iterations": report.iterations, "psi": psi,
            "psi_homogeneity": None if homog is None else str(homog)}
    text = "\n".join([f"prolongation iterations: {report.iterations}",
                      f"psi homogeneity: {data['psi_homogeneity']}"] + [f"  {k} += {v}" for k, v in psi.items()])
    _emit(args, data, text)
    return 0


def _report_command(args, with_holonomy: bool) -> int:
    bundle = _bundle(args)
    report = run_pipeline(bundle, _rep_name(args, bundle), args.connection,
                          with_holonomy=with_holonomy, with_q=args.q, with_timing=args.timing)
    _emit(args, report.to_dict(), report.to_text())
    return 0 if report.passed else 1


def cmd_solve(args) -> int:
    return _report_command(args, with_holonomy=False)


def cmd_holonomy(args) -> int:
    return _report_command(args, with_holonomy=True)


def _parse_numbers(text: str) -> list[Fraction]:
    """Decimal and fractional inputs are read as rationals; evaluation picks exact mode when it can."""
    return [Fraction(item.strip()) for item in text.split(",")]


def cmd_evaluate(args) -> int:
    bundle = _bundle(args)
    conn, _ = _connection(args, bundle)
    rep = conn.rep
    space = s_chain(conn)[-1]
    if args.value:
        coeffs = [Scalar(Fraction(c)) for c in args.value.split(",")]
        if len(coeffs) != space.dim:
            raise PipelineError("evaluate", f"--value needs {space.dim} coordinates in the S^inf basis")
    else:
        coeffs = [ONE] * space.dim
    value = space.combine({i: c for i, c in enumerate(coeffs) if c})
    if args.normal_coords:
        form = normal_coordinate_polynomial(bundle.alpha, rep, value)
        rows = [(label, mono, str(c)) for label, mono, c in form.coefficient_table()]
        data = {"variables": list(form.variables), "degree": form.degree,
                "projecting": [rep.labels[i] for i in form.projecting],
                "components": {rep.labels[i]: str(p) for i, p in enumerate(form.components)},
                "coefficients": [list(r) for r in rows]}
        text = "\n".join([f"normal coordinates: {', '.join(form.variables)}; degree {form.degree}",
                          f"projecting slots: {', '.join(data['projecting'])}"]
                         + [f"  {label}: {mono} -> {c}" for label, mono, c in rows])
        _emit(args, data, text)
        return 0
    factors = [ExpFactor.from_catalog(f, bundle.k_data.algebra.names) for f in bundle.factor_decomposition]
    expr = solution_expression(conn, factors, value, space)
    if args.point is None:
        raise PipelineError("evaluate", f"--point needs values for {', '.join(expr.parameters)}")
    point = _parse_numbers(args.point)
    # chart parameters are named after the bundle coordinates, so read the point in coordinate order
    names = bundle.coordinates if set(expr.parameters) <= set(bundle.coordinates) else expr.parameters
    if len(point) != len(names):
        raise PipelineError("evaluate", f"--point needs {len(names)} values for {', '.join(names)}")
    try:
        result = evaluate_solution(expr, dict(zip(names, point)), exact=True if args.exact else None)
    except ExactExponentialError as exc:
        raise PipelineError("evaluate", str(exc)) from exc
    if isinstance(result, dict):
        comps = {rep.labels[i]: str(result.get(i, Scalar(0))) for i in range(rep.dim)}
    else:
        comps = {rep.labels[i]: _complex_text(z) for i, z in enumerate(result)}
    data = {"geometry": bundle.name, "rep": args.rep, "parameters": list(names),
            "point": [str(p) for p in point], "exact": isinstance(result, dict), "value": comps}
    text = "\n".join(f"{k} = {v}" for k, v in comps.items())
    _emit(args, data, text)
    return 0


def _complex_text(z: complex) -> str:
    re, im = float(z.real), float(z.imag)
    return repr(re) if abs(im) < 1e-15 else f"{re!r}{im:+.17g}j"


def _run_job(job):
    geometry, rep, connection = job
    report = run_pipeline(geometry, rep, connection)
    return geometry, rep, connection, report.passed, [v.to_dict() for v in report.verdicts]


def cmd_report(args) -> int:
    geometries = [args.geometry] if args.geometry else list(EXAMPLE_NAMES)
    jobs = []
    for name in geometries:
        bundle = load_geometry(name)
        jobs += [(name, rep, conn) for rep, conn in fixture_jobs(bundle) if args.rep in (None, rep)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_run_job, jobs))
    else:
        results = [_run_job(j) for j in jobs]
    ok = all(r[3] for r in results)
    data = {"jobs": [{"geometry": g, "rep": r, "connection": c, "passed": p, "verdicts": v}
                     for g, r, c, p, v in results], "passed": ok}
    lines = []
    for g, r, c, p, v in results:
        lines.append(f"[{'PASS' if p else 'FAIL'}] {g} {r} {c}")
        lines += [f"    {x['key']}: expected {x['expected']}, got {x['actual']}" for x in v if not x["passed"]]
    lines.append(f"{sum(r[3] for r in results)}/{len(results)} jobs passed")
    _emit(args, data, "\n".join(lines))
    return 0 if ok else 1


COMMANDS = {
    "validate": (cmd_validate, "check algebra axioms, extension laws, normality and regularity"),
    "normalize": (cmd_normalize, "solve for the normal extension from the graded one"),
    "curvature": (cmd_curvature, "print the curvature of the stored extension"),
    "prolong": (cmd_prolong, "compute the prolongation connection and its Psi table"),
    "solve": (cmd_solve, "compute S^inf, normal and invariant solutions"),
    "holonomy": (cmd_holonomy, "compute solutions and the infinitesimal holonomy"),
    "evaluate": (cmd_evaluate, "evaluate a solution in exponential or normal coordinates"),
    "report": (cmd_report, "run every fixture job and compare with the stored fixtures"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bggkit", description="BGG solutions on homogeneous parabolic geometries")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("geometry_pos", nargs="?", metavar="geometry")
        p.add_argument("rep_pos", nargs="?", metavar="rep")
        p.add_argument("--geometry", "-g", help=f"catalog name ({', '.join(EXAMPLE_NAMES)}) or YAML path")
        p.add_argument("--rep", "-r", help="representation name from the bundle")
        p.add_argument("--connection", "-c", choices=CONNECTION_KINDS, default="prolongation")
        p.add_argument("--format", "-f", choices=("text", "json"), default="text")
        p.add_argument("--exact", action="store_true", help="require exact evaluation")
        p.add_argument("--point", help="comma-separated coordinates x1,...,xn of the chart point")
        p.add_argument("--value", help="comma-separated S^inf coordinates of s(e) (default all ones)")
        p.add_argument("--normal-coords", action="store_true", help="print the normal-coordinate polynomial")
        p.add_argument("--q", action="store_true", help="include Q-polynomial coefficients")
        p.add_argument("--timing", action="store_true", help="include stage timings")
        p.add_argument("--jobs", "-j", type=int, default=1, help="worker processes for report")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.geometry = args.geometry or args.geometry_pos
    args.rep = args.rep or args.rep_pos
    try:
        return args.func(args)
    except (CatalogError, PipelineError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
