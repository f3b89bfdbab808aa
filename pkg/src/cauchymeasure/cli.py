"""Command-line front end.

Every subcommand prints a JSON report document on stdout, except the
measure factories, which print the measure spec itself unless ``--out``
names a file for it.

Exit codes: 0 success, 1 a verification failed, 2 schema / syntax / link
error, 3 precondition / guard / pole error, 4 inconclusive or
non-convergent result.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import cauchy, hardy, measures, screens
from .errors import (
    BoundViolation, CauchyMeasureError, ConsistencyError, DivergenceError, ExprSyntaxError,
    GuardError, LinkError, PoleError, PreconditionError, SchemaError,
)
from .expr import Expr, Z, evaluate, parse_density, to_text
from .numerics import Circle

VERSION = "0.1.0"

EXIT_OK, EXIT_FAIL, EXIT_SCHEMA, EXIT_PRECONDITION, EXIT_INCONCLUSIVE = 0, 1, 2, 3, 4


class Outcome(Exception):
    """Carries a non-zero exit status together with partial results."""

    def __init__(self, code, status, results):
        self.code, self.status, self.results = code, status, results


def _cpair(z):
    z = complex(z)
    return [z.real, z.imag]


def _complex_arg(text: str) -> complex:
    """``"re,im"``, ``"re"`` or a Python complex literal such as ``"1+2j"``."""
    try:
        if "," in text:
            re_, im = text.split(",")
            return complex(float(re_), float(im))
        return complex(text.replace(" ", ""))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _floats(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated list of numbers: {text!r}") from None


def _grid_arg(text: str):
    parts = text.split(":")
    if len(parts) != 5:
        raise argparse.ArgumentTypeError("grid must be xmin:xmax:ymin:ymax:steps")
    try:
        *box, steps = parts
        return tuple(float(x) for x in box) + (int(steps),)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _domain_arg(text: str) -> tuple:
    """``"cx,cy,R"`` optionally followed by ``";hx,hy,r"`` for each hole.

    Returns the circles; geometry is validated later so that a bad domain
    is reported as a precondition error rather than a usage error.
    """
    try:
        circles = []
        for part in text.split(";"):
            cx, cy, r = (float(x) for x in part.split(","))
            circles.append(Circle(complex(cx, cy), r))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad domain {text!r}; expected cx,cy,R[;hx,hy,r...]") from None
    return tuple(circles)


def _domain(circles) -> hardy.CircularDomain:
    return hardy.CircularDomain(circles[0], tuple(circles[1:]))


def _expr_arg(text: str):
    return parse_density(text)


# {{{ subcommands


def _schedule(args):
    return hardy.EpsilonSchedule(args.eps0, args.eps_ratio, args.eps_steps)


def _emit_measure(m, args, results):
    """Write the measure to ``--out``; without it, the spec itself is the output."""
    text = measures.dumps(m)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text)
        results["measure_file"] = args.out
        return None
    return text


def cmd_eval(args):
    m = measures.load(args.spec)
    pts = args.at or [0j]
    vals = [cauchy.transform(m, z, args.nodes) for z in pts]
    return m.name, {"points": [_cpair(z) for z in pts], "values": [_cpair(v) for v in vals]}


def export_field(fieldv: cauchy.TransformField, path, fmt: str = "csv") -> None:
    """Write a sampled field as CSV (re_z, im_z, re_val, im_val, reliable) or JSON."""
    if fmt not in ("csv", "json"):
        raise PreconditionError(f"unknown field format {fmt!r}")
    with open(path, "w") as f:
        f.write(fieldv.to_csv() if fmt == "csv" else fieldv.to_json())


def import_field(path, fmt: str = "csv") -> cauchy.TransformField:
    with open(path) as f:
        text = f.read()
    return cauchy.TransformField.from_csv(text) if fmt == "csv" else cauchy.TransformField.from_json(text)


def cmd_grid(args):
    m = measures.load(args.spec)
    pts = cauchy.grid_points(*args.grid)
    fieldv = cauchy.transform_grid(m, pts, args.nodes)
    results = {"points": len(fieldv), "reliable": int(fieldv.reliable.sum()), "format": args.format}
    if args.out:
        export_field(fieldv, args.out, args.format)
        results["field_file"] = args.out
        return m.name, results
    text = fieldv.to_csv() if args.format == "csv" else fieldv.to_json()
    return m.name, results, text


def cmd_moments(args):
    m = measures.load(args.spec)
    ks = list(range(1, args.kmax + 1))
    vals = cauchy.moments(m, ks, args.nodes)
    ok = bool(np.all(np.abs(vals) < args.tol))
    results = {"k": ks, "moments": [_cpair(v) for v in vals], "abs": [float(abs(v)) for v in vals],
               "tolerance": args.tol, "passed": ok}
    if not ok:
        raise Outcome(EXIT_FAIL, "fail", results)
    return m.name, results


def cmd_verify(args):
    m = measures.load(args.spec)
    if args.disk is not None:
        region = cauchy.Disk(args.disk)
    else:
        s = max(cauchy.support_radius(m), 1e-3)
        r_in, r_out = args.annulus or (1.1 * s, 3 * s)
        region = cauchy.Annulus(r_in, r_out)
    rep = cauchy.verify_vanishing(m, region, expected=args.expected, tol=args.tol,
                                  samples=args.samples, n=args.nodes)
    results = rep.to_dict()
    if args.expected is not None:
        results["expected"] = to_text(args.expected)
    if rep.status == "inconclusive":
        raise Outcome(EXIT_INCONCLUSIVE, "inconclusive", results)
    if not rep.passed:
        raise Outcome(EXIT_FAIL, "fail", results)
    return m.name, results


def _exterior_check(m, args, r_in, r_out):
    return cauchy.verify_vanishing(m, cauchy.Annulus(r_in, r_out), tol=args.tol,
                                   samples=args.samples, n=args.nodes)


def _finish_factory(m, args, reports, extra=None):
    results = {"reports": [r.to_dict() for r in reports], **(extra or {})}
    text = _emit_measure(m, args, results)
    bad = [r for r in reports if not r.passed]
    if any(r.status == "inconclusive" for r in bad):
        raise Outcome(EXIT_INCONCLUSIVE, "inconclusive", results)
    if bad:
        raise Outcome(EXIT_FAIL, "fail", results)
    if text is not None:
        return m.name, results, text
    return m.name, results


def cmd_screen_sv(args):
    if args.spec:
        nuK = measures.load(args.spec)
    else:
        locs = args.atom or [0.5 + 0j]
        masses = args.mass or [1.0] * len(locs)
        if len(masses) != len(locs):
            raise PreconditionError("give one --mass per --atom")
        nuK = measures.atoms("nuK", locs, masses)
    m = screens.build_sv_scenario(nuK, args.nodes)
    reports = [_exterior_check(m, args, 1.1, 3.0)]
    return _finish_factory(m, args, reports, {"source": nuK.name})


def cmd_screen_ex3(args):
    layout = screens.exIII_layout(args.m, args.radii, args.centers, args.nodes)
    m = screens.build_exIII_scenario(args.m, layout.radii, layout.centers, args.nodes)
    reports = [_exterior_check(m, args, 1.1, 3.0)]
    for d in layout.disks:
        reports.append(cauchy.verify_vanishing(m, cauchy.Disk(0.9 * d.radius, d.center), tol=args.tol,
                                               samples=args.samples, n=args.nodes))
    reports.append(cauchy.verify_vanishing(
        m, cauchy.Disk(0.9), expected=-1 / Z, tol=args.tol, samples=args.samples, n=args.nodes,
        exclude=[Circle(d.center, 1.1 * d.radius) for d in layout.disks] + [Circle(0j, 0.05)]))
    extra = {"radii": layout.radii, "centers": [_cpair(c) for c in layout.centers],
             "total_variation": measures.total_variation(m, args.nodes),
             "total_variation_bound": layout.tv_bound,
             "total_variation_bound_unnormalized": layout.tv_bound_unnormalized}
    return _finish_factory(m, args, reports, extra)


def cmd_problem42(args):
    domains = [_domain(c) for c in args.domain or [_domain_arg("3,0,1"), _domain_arg("-3,0,1")]]
    m = screens.build_problem42(domains)
    pts = [d.outer.center for d in domains] + [h.center for d in domains for h in d.holes]
    vals = [cauchy.transform(m, z, args.nodes) for z in pts]
    want = [1.0] * len(domains) + [0.0] * (len(pts) - len(domains))
    err = max((abs(v - w) for v, w in zip(vals, want)), default=0.0)
    tv = measures.total_variation(m, args.nodes)
    tv_want = sum(c.length() for d in domains for c in d.boundary()) / (2 * math.pi)
    results = {"points": [_cpair(z) for z in pts], "values": [_cpair(v) for v in vals],
               "max_error": err, "total_variation": tv, "total_variation_expected": tv_want}
    text = _emit_measure(m, args, results)
    if err > args.tol or abs(tv - tv_want) > args.tol:
        raise Outcome(EXIT_FAIL, "fail", results)
    return (m.name, results) if text is None else (m.name, results, text)


def cmd_h1(args):
    d = _domain(args.domain) if args.domain else hardy.CircularDomain.disk()
    rep = hardy.h1_norm(args.kappa, d, _schedule(args), args.nodes)
    results = rep.to_dict()
    results["kappa"] = to_text(args.kappa)
    if not rep.converged:
        raise Outcome(EXIT_INCONCLUSIVE, "not converged", results)
    return "h1", results


def cmd_nu_kappa(args):
    d = _domain(args.domain) if args.domain else hardy.CircularDomain.disk()
    m = hardy.nu_kappa(args.kappa, d, args.eps, _schedule(args), args.nodes)
    rep = hardy.h1_norm(args.kappa, d, _schedule(args), args.nodes)
    tv = measures.total_variation(m, args.nodes)
    results = {"kappa": to_text(args.kappa), "total_variation": tv, "h1_normalized": rep.normalized,
               "difference": abs(tv - rep.normalized)}
    text = _emit_measure(m, args, results)
    return (m.name, results) if text is None else (m.name, results, text)


def cmd_decompose(args):
    d = _domain(args.domain or _domain_arg("0,0,1;0,0,0.3"))
    parts = hardy.hardy_decompose(args.F, d, args.nodes)
    mid = hardy.decomposition_domain(d)
    # keep samples a quarter gap away from every contour
    q = mid.min_gap() / 4
    z = cauchy.sample_region(cauchy.Disk(mid.outer.radius - q, mid.outer.center), args.samples,
                             exclude=[Circle(h.center, h.radius + q) for h in mid.holes])
    total = sum(evaluate(p, z, n=args.nodes) for p in parts)
    err = float(np.max(np.abs(total - evaluate(args.F, z, n=args.nodes))))
    results = {"F": to_text(args.F), "parts": len(parts), "samples": int(len(z)),
               "max_error": err, "tolerance": args.tol,
               "contours": [{"center": _cpair(c.center), "radius": c.radius, "orientation": c.orientation}
                            for c in mid.boundary()]}
    if err > args.tol:
        raise Outcome(EXIT_FAIL, "fail", results)
    return "decompose", results


def cmd_tumarkin(args):
    if args.spec:
        eta = measures.load(args.spec)
    else:
        eta = measures.MeasureSpec("eta", (measures.CircleDensity(Circle(0j, 1.0), 1 / (2j * math.pi)),))
    radii = args.radii or [0.5, 0.7, 0.9]
    results = {"radii": radii}
    try:
        value = hardy.tumarkin_functional(eta, radii, args.nodes, args.tol)
    except BoundViolation as exc:
        results.update(value=exc.value, bound=exc.bound, passed=False)
        raise Outcome(EXIT_FAIL, "fail", results)
    bound = 2 * math.pi * measures.total_variation(eta, args.nodes)
    results.update(value=value, bound=bound, passed=True)
    return eta.name, results


def cmd_transport(args):
    m = measures.load(args.spec)
    pushed = measures.moebius_pushforward(m, args.x0, n=args.nodes)
    s = max(cauchy.support_radius(m), 1.0)
    ys = cauchy.sample_region(cauchy.Annulus(1.5 * s, 3 * s), args.samples)
    ys = ys[abs(ys - args.x0) > 1e-3]
    lhs = cauchy.transform(pushed, 1 / (args.x0 - ys), args.nodes)
    rhs = (args.x0 - ys) * cauchy.transform(m, ys, args.nodes)
    err = float(np.max(np.abs(lhs - rhs)))
    results = {"x0": _cpair(args.x0), "samples": int(len(ys)), "max_error": err, "tolerance": args.tol}
    text = _emit_measure(pushed, args, results)
    if err > args.tol:
        raise Outcome(EXIT_FAIL, "fail", results)
    return (pushed.name, results) if text is None else (pushed.name, results, text)


def cmd_canon(args):
    m = measures.load(args.spec)
    results = {}
    text = _emit_measure(m, args, results)
    return (m.name, results) if text is None else (m.name, results, text)


# }}}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cauchymeasure", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, spec=True, spec_optional=False, tol=1e-9):
        s = sub.add_parser(name, help=help_)
        if spec:
            if spec_optional:
                s.add_argument("--spec", help="measure spec JSON file")
            else:
                s.add_argument("spec", help="measure spec JSON file")
        s.add_argument("--nodes", type=int, default=1024, help="quadrature nodes per component (default 1024)")
        s.add_argument("--tol", type=float, default=tol, help=f"pass tolerance (default {tol:g})")
        s.add_argument("--samples", type=int, default=200, help="sample points for checks (default 200)")
        s.add_argument("--out", help="output file; without it results go to stdout")
        s.set_defaults(func=fn)
        return s

    def add_eps(s):
        s.add_argument("--eps0", type=float, default=0.1, help="first contour shrink (default 0.1)")
        s.add_argument("--eps-ratio", type=float, default=0.1, help="shrink ratio per step (default 0.1)")
        s.add_argument("--eps-steps", type=int, default=10, help="number of steps (default 10)")
        s.add_argument("--domain", type=_domain_arg, help="cx,cy,R[;hx,hy,r...] (default unit disk)")

    s = add("eval", cmd_eval, "transform at given points")
    s.add_argument("--at", type=_complex_arg, action="append", help="point re,im (repeatable; default 0)")
    s = add("grid", cmd_grid, "transform on a rectangular grid")
    s.add_argument("--grid", type=_grid_arg, default=(-2.0, 2.0, -2.0, 2.0, 41),
                   help="xmin:xmax:ymin:ymax:steps (default -2:2:-2:2:41)")
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s = add("moments", cmd_moments, "moments of order 1..kmax", tol=1e-10)
    s.add_argument("--kmax", type=int, default=20)
    s = add("verify", cmd_verify, "check the transform against zero or an expression on a region")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--annulus", type=_floats, help="r_in,r_out (default 1.1 and 3 times the support radius)")
    g.add_argument("--disk", type=float, help="radius of a centered disk")
    s.add_argument("--expected", type=_expr_arg, help="expected transform as a density expression")
    s = add("screen-sv", cmd_screen_sv, "measure plus its outer screen on the unit circle",
            spec_optional=True)
    s.add_argument("--atom", type=_complex_arg, action="append", help="atom location (default 0.5)")
    s.add_argument("--mass", type=float, action="append", help="atom mass (default 1)")
    s = add("screen-ex3", cmd_screen_ex3, "delta_0 screened outside the unit disk and inside m disks",
            spec=False)
    s.add_argument("--m", type=int, default=3)
    s.add_argument("--radii", type=_floats)
    s.add_argument("--centers", type=lambda t: [_complex_arg(x) for x in t.split(";")],
                   help="re,im;re,im;...")
    s = add("problem42", cmd_problem42, "indicator-transform measure of circular domains", spec=False)
    s.add_argument("--domain", type=_domain_arg, action="append",
                   help="cx,cy,R[;hx,hy,r...] (repeatable; default unit disks at +-3)")
    s = add("h1", cmd_h1, "H1 norm over shrinking boundary contours", spec=False)
    s.add_argument("--kappa", type=_expr_arg, default=parse_density("1"))
    add_eps(s)
    s = add("nu-kappa", cmd_nu_kappa, "boundary measure reproducing kappa", spec=False, tol=1e-8)
    s.add_argument("--kappa", type=_expr_arg, default=parse_density("1"))
    s.add_argument("--eps", type=float, help="contour shrink (default: last schedule step)")
    add_eps(s)
    s = add("decompose", cmd_decompose, "split F into parts holomorphic across each boundary circle",
            spec=False, tol=1e-10)
    s.add_argument("--F", type=_expr_arg, default=parse_density("z + 1/z"))
    s.add_argument("--domain", type=_domain_arg, help="cx,cy,R[;hx,hy,r...] (default 0.3 < |z| < 1)")
    s = add("tumarkin", cmd_tumarkin, "Tumarkin functional of a measure on the unit circle",
            spec_optional=True, tol=1e-6)
    s.add_argument("--radii", type=_floats)
    s = add("transport", cmd_transport, "push a measure through z -> 1/(x0 - z) and check the identity",
            tol=1e-10)
    s.add_argument("--x0", type=_complex_arg, required=True)
    add("canon", cmd_canon, "rewrite a measure spec in canonical form")
    return p


def _exit_code(exc) -> int:
    if isinstance(exc, (SchemaError, ExprSyntaxError, LinkError)):
        return EXIT_SCHEMA
    if isinstance(exc, (DivergenceError, ConsistencyError)):
        return EXIT_INCONCLUSIVE
    if isinstance(exc, (PreconditionError, GuardError, PoleError)):
        return EXIT_PRECONDITION
    if isinstance(exc, BoundViolation):
        return EXIT_FAIL
    return EXIT_PRECONDITION


def _echo_value(v):
    if isinstance(v, complex):
        return _cpair(v)
    if isinstance(v, Expr):
        return to_text(v)
    if isinstance(v, (list, tuple)):
        return [_echo_value(x) for x in v]
    if v is None or isinstance(v, (int, float, str, bool)):
        return v
    return str(v)


def _echo(args) -> dict:
    return {k: _echo_value(v) for k, v in sorted(vars(args).items()) if k != "func"}


def _json_default(o):
    if isinstance(o, complex):
        return _cpair(o)
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _nan_free(o):
    if isinstance(o, float) and not math.isfinite(o):
        return None
    if isinstance(o, dict):
        return {k: _nan_free(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_nan_free(v) for v in o]
    return o


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code, status, results, scenario, payload = EXIT_OK, "pass", {}, args.command, None
    try:
        out = args.func(args)
        scenario, results = out[0], out[1]
        payload = out[2] if len(out) > 2 else None
    except Outcome as o:
        code, status, results = o.code, o.status, o.results
    except (CauchyMeasureError, OSError) as exc:
        code = _exit_code(exc) if isinstance(exc, CauchyMeasureError) else EXIT_SCHEMA
        status = "error"
        results = {"error": type(exc).__name__, "message": str(exc)}
        print(f"cauchymeasure {args.command}: {exc}", file=sys.stderr)
    if payload is not None and code == EXIT_OK:
        sys.stdout.write(payload)
        return code
    doc = {
        "invocation": {"subcommand": args.command, "args": _echo(args)},
        "version": VERSION,
        "scenario": scenario,
        "status": status,
        "exit_code": code,
        "results": _nan_free(json.loads(json.dumps(results, default=_json_default))),
        "wall_time": time.perf_counter() - start,
    }
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
