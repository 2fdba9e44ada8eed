"""Command-line front end.

Exit codes: 0 success or Accept, 1 Reject, 2 Exhausted, 3 usage or input
error.  JSON output always has sorted keys and rationals in lowest terms.
"""

from __future__ import annotations

import argparse
import functools
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import polyfun, polyhedron
from .certificate import DEFAULTS, build_certificate, verify_certificate
from .detect1d import detect_integral_values, reconstruct_transintegral
from .detectnd import (
    GridSpec,
    SkeletonError,
    detect_on_skeleton,
    reconstruct_box,
    slope_bound,
)
from .oracle import (
    Box,
    FunctionOracle,
    UnknownOracle,
    axis_convexity_check,
    builtin_oracle,
    from_polyfun,
)
from .polyfun import LineParam, PolyhedralFunction
from .polyhedron import RationalPolyhedron
from .ratfun import (
    DimensionError,
    IntegralityClass,
    format_rat,
    functional_to_json,
    parse_point,
    parse_rat,
    point,
)
from .tropical import detect_tropical, restrict_to_tropical_line

EXIT_OK, EXIT_REJECT, EXIT_EXHAUSTED, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _dump(obj, out=None) -> None:
    text = json.dumps(obj, sort_keys=True, indent=2)
    if out and out != "-":
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_json(path: str, what: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"{what}: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{what}: {path} is not valid JSON ({exc.msg})") from None


def _field(name: str, fn, *args):
    try:
        return fn(*args)
    except (ValueError, TypeError, KeyError) as exc:
        raise UsageError(f"{name}: {exc}") from None


def load_function(path: str) -> PolyhedralFunction:
    return _field("--function", PolyhedralFunction.from_json, _load_json(path, "--function"))


def load_polyhedron(path: str) -> RationalPolyhedron:
    return _field("--polyhedron", RationalPolyhedron.from_json, _load_json(path, "--polyhedron"))


def load_oracle(spec: str) -> FunctionOracle:
    kind, _, rest = spec.partition(":")
    if kind == "builtin":
        try:
            return builtin_oracle(rest)
        except UnknownOracle as exc:
            raise UsageError(f"--oracle: {exc.args[0]}") from None
    if kind == "file":
        return from_polyfun(load_function(rest), name=spec)
    raise UsageError(f"--oracle: expected file:PATH or builtin:NAME, got {spec!r}")


def parse_box(text: str) -> Box:
    parts = text.replace(",", " ").split()
    if not parts or len(parts) % 2:
        raise UsageError("--box: expected an even number of rationals 'x0 x1 y0 y1 ...'")
    vals = [_field("--box", parse_rat, p) for p in parts]
    return _field("--box", Box, tuple(vals[0::2]), tuple(vals[1::2]))


def parse_centers(items: Sequence[str]) -> list:
    out = []
    for item in items:
        for chunk in item.split(";"):
            if chunk.strip():
                c = _field("--centers", parse_point, chunk)
                if len(c) != 2:
                    raise UsageError(f"--centers: {chunk!r} is not a pair")
                out.append(c)
    if not out:
        raise UsageError("--centers: no centers given")
    return out


def line_from_json(obj) -> LineParam:
    lo, hi = obj.get("interval", [None, None])
    return LineParam(point(obj["base"]), point(obj["direction"]),
                     None if lo is None else parse_rat(str(lo)), None if hi is None else parse_rat(str(hi)))


def _outcome_code(out) -> int:
    return {"accept": EXIT_OK, "reject": EXIT_REJECT, "exhausted": EXIT_EXHAUSTED}[out.tag]


def _emit_outcome(out, args, kind: str, **params) -> int:
    body = {"outcome": out.tag}
    if out.accepted:
        cert = build_certificate(out, kind, args.oracle, **params)
        body["certificate"] = cert
        if args.out:
            _dump(cert, args.out)
    elif out.rejected:
        body["witness"] = out.witness
        body["queries_used"] = len(out.queries)
    else:
        body["report"] = out.report
        body["queries_used"] = len(out.queries)
    _dump(body)
    return _outcome_code(out)


# ---------------------------------------------------------------- commands

def cmd_eval(a) -> int:
    f = load_function(a.function)
    x = _field("-x", parse_point, a.x)
    if len(x) != f.n:
        raise UsageError(f"-x: point has dimension {len(x)}, function has {f.n}")
    print(format_rat(f(x)))
    return EXIT_OK


def cmd_canon(a) -> int:
    _dump(polyfun.canonicalize(load_function(a.function)).to_json(), a.out)
    return EXIT_OK


def _binary(a, op) -> int:
    f, g = load_function(a.function), load_function(a.other)
    _dump(_field("-g", op, f, g).to_json(), a.out)
    return EXIT_OK


def cmd_restrict(a) -> int:
    f = load_function(a.function)
    line = _field("--base/--direction", LineParam, parse_point(a.base), parse_point(a.direction))
    _dump(_field("--base", polyfun.restrict, f, line).to_json(), a.out)
    return EXIT_OK


def cmd_dirderiv(a) -> int:
    f = load_function(a.function)
    v = _field("-z", polyfun.dir_deriv, f, parse_point(a.x), parse_point(a.z))
    print(format_rat(v))
    return EXIT_OK


def cmd_domains(a) -> int:
    f = polyfun.canonicalize(load_function(a.function))
    _dump([{"functional": functional_to_json(d.functional), "region": d.region.to_json()}
           for d in polyfun.domains_of_affinity(f)], a.out)
    return EXIT_OK


def cmd_facets(a) -> int:
    P = load_polyhedron(a.polyhedron)
    out = []
    for F in _field("--polyhedron", polyhedron.facets, P):
        item = {"active": sorted(F.active), "dimension": polyhedron.dimension(F.region)}
        if P.n <= 3:
            item["vertices"] = [[format_rat(c) for c in v] for v in polyhedron.vertices(F.region)]
        out.append(item)
    _dump(out, a.out)
    return EXIT_OK


def cmd_vertices(a) -> int:
    P = load_polyhedron(a.polyhedron)
    vs = _field("--polyhedron", polyhedron.vertices, P)
    _dump([[format_rat(c) for c in v] for v in vs], a.out)
    return EXIT_OK


def cmd_jensen(a) -> int:
    o = load_oracle(a.oracle)
    box = parse_box(a.box)
    if box.n != o.n:
        raise UsageError(f"--box: dimension {box.n} for an oracle on R^{o.n}")
    rep = axis_convexity_check(o, box, _field("--resolution", parse_rat, a.resolution))
    _dump(rep.to_json(), a.out)
    return EXIT_OK if rep.passed else EXIT_REJECT


def _interval(a):
    lo, hi = (_field("--interval", parse_rat, v) for v in a.interval)
    if not lo < hi:
        raise UsageError("--interval: need a < b")
    return lo, hi


def _one_dim(a) -> FunctionOracle:
    o = load_oracle(a.oracle)
    if o.n != 1:
        raise UsageError(f"--oracle: {a.oracle} is defined on R^{o.n}, expected R^1")
    return o


def cmd_detect1d(a) -> int:
    o = _one_dim(a)
    lo, hi = _interval(a)
    out = reconstruct_transintegral(o, lo, hi, a.budget)
    return _emit_outcome(out, a, "detect1d", budget=a.budget)


def cmd_detect_integral(a) -> int:
    o = _one_dim(a)
    lo, hi = _interval(a)
    out = detect_integral_values(o, lo, hi, a.budget, a.samples)
    return _emit_outcome(out, a, "detect-integral", budget=a.budget, samples=a.samples)


def cmd_detectnd(a) -> int:
    o = load_oracle(a.oracle)
    box = parse_box(a.box)
    if box.n != o.n:
        raise UsageError(f"--box: dimension {box.n} for an oracle on R^{o.n}")
    step = _field("--step", parse_rat, a.step)
    grid = _field("--step", GridSpec, box, step)
    mode = IntegralityClass.INTEGRAL if a.mode == "integral" else IntegralityClass.TRANSINTEGRAL
    out = reconstruct_box(o, grid, a.budget, mode)
    if out.accepted:
        out.extra = {"grid": grid.to_json(), "mode": a.mode}
    return _emit_outcome(out, a, "detectnd", budget=a.budget, step=step)


def cmd_skeleton(a) -> int:
    o = load_oracle(a.oracle)
    P = load_polyhedron(a.polyhedron)
    raw = _load_json(a.lines, "--lines")
    lines = [_field("--lines", line_from_json, obj) for obj in raw]
    rl = _field("--ray-length", parse_rat, a.ray_length)
    try:
        out = detect_on_skeleton(o, P, lines, a.budget, rl)
    except SkeletonError as exc:
        raise UsageError(f"--lines: {exc}") from None
    return _emit_outcome(out, a, "skeleton", budget=a.budget, ray_length=rl)


def cmd_tropline(a) -> int:
    f = load_function(a.function)
    c = _field("--center", parse_point, a.center)
    rs = _field("--center", restrict_to_tropical_line, f, c)
    _dump({tag: g.to_json() for tag, g in rs.items()}, a.out)
    return EXIT_OK


def cmd_detect_tropical(a) -> int:
    o = load_oracle(a.oracle)
    box = parse_box(a.box)
    centers = parse_centers(a.centers)
    rl = _field("--ray-length", parse_rat, a.ray_length)
    step = _field("--step", parse_rat, a.step)
    out = _field("--centers", detect_tropical, o, centers, rl, a.budget, box, step)
    return _emit_outcome(out, a, "detect-tropical", budget=a.budget, step=step, ray_length=rl)


def cmd_slope_bound(a) -> int:
    f = load_function(a.function)
    P = load_polyhedron(a.polyhedron)
    res = _field("--polyhedron", slope_bound, f, P)
    _dump([iv.to_json() for iv in res], a.out)
    return EXIT_OK


def cmd_verify_cert(a) -> int:
    cert = _load_json(a.cert, "--cert")
    spec = a.oracle or (cert.get("oracle") if isinstance(cert, dict) else None)
    if not spec:
        raise UsageError("--oracle: certificate names no oracle; pass one")
    o = load_oracle(spec)
    rep = _field("--cert", verify_certificate, cert, o)
    _dump(rep.to_json())
    return EXIT_OK if rep.ok else EXIT_REJECT


def _segments(f: PolyhedralFunction, lo: Fraction, hi: Fraction) -> list:
    return [{"start": format_rat(s), "end": format_rat(e), "functional": functional_to_json(lam)}
            for s, e, lam in polyfun.pieces_on_interval(f, lo, hi)]


def cmd_plot1d(a) -> int:
    f = load_function(a.function)
    if f.n != 1:
        raise UsageError(f"--function: plot1d needs a one-variable function, got n={f.n}")
    lo, hi = _interval(a)
    step = _field("--step", parse_rat, a.step)
    if step <= 0:
        raise UsageError("--step: must be positive")
    t = lo
    rows = []
    while t < hi:
        rows.append(t)
        t += step
    rows.append(hi)
    for t in rows:
        print(f"{format_rat(t)}\t{format_rat(f((t,)))}")
    segs = _segments(f, lo, hi)
    if a.out:
        _dump(segs, a.out)
    else:
        print("# segments " + json.dumps(segs, sort_keys=True))
    return EXIT_OK


def _polygon_order(vs: list) -> list:
    """Counter-clockwise order around the vertex centroid, exactly."""
    cx = sum(v[0] for v in vs) / len(vs)
    cy = sum(v[1] for v in vs) / len(vs)

    def half(v):
        dx, dy = v[0] - cx, v[1] - cy
        return 0 if dy > 0 or (dy == 0 and dx > 0) else 1

    def cmp(u, v):
        hu, hv = half(u), half(v)
        if hu != hv:
            return hu - hv
        cross = (u[0] - cx) * (v[1] - cy) - (u[1] - cy) * (v[0] - cx)
        return -1 if cross > 0 else 1 if cross < 0 else 0

    return sorted(vs, key=functools.cmp_to_key(cmp))


def cmd_plot2d(a) -> int:
    f = polyfun.canonicalize(load_function(a.function))
    if f.n != 2:
        raise UsageError(f"--function: plot2d needs a two-variable function, got n={f.n}")
    box = parse_box(a.box)
    if box.n != 2:
        raise UsageError("--box: plot2d needs a planar box")
    cells = []
    for d in polyfun.domains_of_affinity(f):
        region = d.region.intersect(box.polyhedron())
        vs = polyhedron.vertices(region)
        if len(vs) < 3 or polyhedron.dimension(region) < 2:
            continue
        cells.append({"label": str(d.functional), "ambient": functional_to_json(d.functional),
                      "polygon": [[format_rat(c) for c in v] for v in _polygon_order(vs)]})
    _dump({"box": box.to_json(), "cells": cells}, a.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polymax", description="Exact polyhedral functions and oracle-based detection.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def cmd(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(run=fn)
        sp.add_argument("--out", help="write JSON output (or the certificate) here")
        return sp

    def fn_arg(sp):
        sp.add_argument("-f", "--function", required=True, help="function JSON file")

    def oracle_arg(sp):
        sp.add_argument("--oracle", required=True, help="file:PATH or builtin:NAME")

    def budget_arg(sp):
        sp.add_argument("--budget", type=int, default=DEFAULTS["budget"])

    sp = cmd("eval", cmd_eval, "evaluate a function at a point")
    fn_arg(sp)
    sp.add_argument("-x", required=True, help="point, e.g. '1,2'")

    sp = cmd("canon", cmd_canon, "canonical form")
    fn_arg(sp)

    for name, op, help_ in (("tropadd", polyfun.trop_add, "tropical sum (max)"),
                            ("tropmul", polyfun.trop_mul, "tropical product (+)")):
        sp = cmd(name, lambda a, op=op: _binary(a, op), help_)
        fn_arg(sp)
        sp.add_argument("-g", "--other", required=True, help="second function JSON file")

    sp = cmd("restrict", cmd_restrict, "restrict to a line")
    fn_arg(sp)
    sp.add_argument("--base", required=True)
    sp.add_argument("--direction", required=True)

    sp = cmd("dirderiv", cmd_dirderiv, "directional derivative f'(x, z)")
    fn_arg(sp)
    sp.add_argument("-x", required=True)
    sp.add_argument("-z", required=True)

    sp = cmd("domains", cmd_domains, "domains of affinity")
    fn_arg(sp)

    for name, fn in (("facets", cmd_facets), ("vertices", cmd_vertices)):
        sp = cmd(name, fn, f"{name} of a polyhedron")
        sp.add_argument("-P", "--polyhedron", required=True)

    sp = cmd("jensen", cmd_jensen, "axis-line convexity check on a grid")
    oracle_arg(sp)
    sp.add_argument("--box", required=True)
    sp.add_argument("--resolution", default=DEFAULTS["resolution"])

    sp = cmd("detect1d", cmd_detect1d, "reconstruct a 1-D integer-slope function")
    oracle_arg(sp)
    sp.add_argument("--interval", nargs=2, required=True, metavar=("A", "B"))
    budget_arg(sp)

    sp = cmd("detect-integral", cmd_detect_integral, "1-D integral-value detection")
    oracle_arg(sp)
    sp.add_argument("--interval", nargs=2, required=True, metavar=("A", "B"))
    budget_arg(sp)
    sp.add_argument("--samples", type=int, default=100)

    sp = cmd("detectnd", cmd_detectnd, "reconstruct on a box in 2 or 3 variables")
    oracle_arg(sp)
    sp.add_argument("--box", required=True)
    sp.add_argument("--step", default=DEFAULTS["step"])
    sp.add_argument("--mode", choices=("transintegral", "integral"), default="transintegral")
    budget_arg(sp)

    sp = cmd("skeleton", cmd_skeleton, "detection along skeleton lines")
    oracle_arg(sp)
    sp.add_argument("-P", "--polyhedron", required=True)
    sp.add_argument("--lines", required=True, help="JSON list of {base, direction, interval}")
    sp.add_argument("--ray-length", default=DEFAULTS["ray_length"])
    budget_arg(sp)

    sp = cmd("tropline", cmd_tropline, "restrictions to a tropical line")
    fn_arg(sp)
    sp.add_argument("--center", required=True)

    sp = cmd("detect-tropical", cmd_detect_tropical, "tropical-line detector on a planar box")
    oracle_arg(sp)
    sp.add_argument("--box", required=True)
    sp.add_argument("--centers", nargs="+", required=True, help="pairs 'x,y' (or 'x,y;x,y')")
    sp.add_argument("--ray-length", default=DEFAULTS["ray_length"])
    sp.add_argument("--step", default=DEFAULTS["step"])
    budget_arg(sp)

    sp = cmd("slope-bound", cmd_slope_bound, "ambient slope intervals on a polyhedron")
    fn_arg(sp)
    sp.add_argument("-P", "--polyhedron", required=True)

    sp = cmd("verify-cert", cmd_verify_cert, "replay a certificate against its oracle")
    sp.add_argument("--cert", required=True)
    sp.add_argument("--oracle", help="override the oracle named in the certificate")

    sp = cmd("plot1d", cmd_plot1d, "TSV samples plus segment list")
    fn_arg(sp)
    sp.add_argument("--interval", nargs=2, required=True, metavar=("A", "B"))
    sp.add_argument("--step", default=DEFAULTS["resolution"])

    sp = cmd("plot2d", cmd_plot2d, "cell polygons with ambient labels")
    fn_arg(sp)
    sp.add_argument("--box", required=True)
    return p


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
