"""Detection of polyhedral functions of 2 or 3 variables from an oracle.

The workhorse is :func:`reconstruct_box`.  One-variable reconstructions
along axis-parallel grid lines give, at every grid node that is not a kink
of any of its axis lines, a candidate ambient functional (the axis slopes
plus the node value).  The maximum of the candidates is then certified
region by region: on each of its domains of affinity the oracle must agree
with the domain's functional at every vertex and at the vertex centroid,
which for a convex oracle forces agreement on the whole domain.  Domains
that fail trigger a finer grid over their bounding box.

:func:`slope_bound` brackets the ambient slopes of a function on a
polyhedron inside an affine orthant, and :func:`detect_on_skeleton` runs
one-variable detection along user-supplied lines plus an interior box.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import exact
from .detect1d import (
    DEFAULT_BUDGET,
    DetectOutcome,
    accept,
    exhausted,
    reconstruct_convex,
    reconstruct_transintegral,
    reject,
)
from .oracle import Box, FunctionOracle, QueryLog
from .polyfun import (
    LineParam,
    PolyhedralFunction,
    active_set,
    canonicalize,
    pieces_on_interval,
    restrict,
    strictly_inside_hull,
)
from .polyhedron import (
    RationalPolyhedron,
    containing_orthant,
    dimension,
    facets,
    is_bounded,
    line_interval,
    relative_interior_point,
    vertices,
)
from .ratfun import (
    AffineFunctional,
    DimensionError,
    IntegralityClass,
    Point,
    basis_vector,
    format_point,
    format_rat,
    functional_to_json,
    membership_details,
    point,
    primitive_direction,
    rat,
)

MAX_REFINEMENTS = 3
# further halvings that only probe around points where certification failed
LOCAL_REFINEMENTS = 6
DEFAULT_STEP = Fraction(1, 2)
DEFAULT_RAY_LENGTH = Fraction(4)
PROMISE_ND = "convex-on-region"


@dataclass(frozen=True)
class GridSpec:
    box: Box
    step: tuple

    def __post_init__(self):
        step = self.step
        if not isinstance(step, (tuple, list)):
            step = (step,) * self.box.n
        step = tuple(rat(s) for s in step)
        if len(step) != self.box.n:
            raise DimensionError("one step per axis is required")
        for i, s in enumerate(step):
            if s <= 0:
                raise ValueError("grid steps must be positive")
            side = self.box.highs[i] - self.box.lows[i]
            if (side / s).denominator != 1:
                raise ValueError(f"step {format_rat(s)} does not divide side {format_rat(side)} of axis {i}")
        object.__setattr__(self, "step", step)

    @property
    def n(self) -> int:
        return self.box.n

    def axis_values(self, i: int, step: Optional[Fraction] = None) -> list[Fraction]:
        return self.box.axis_values(i, self.step[i] if step is None else step)

    def to_json(self) -> dict:
        return {"box": self.box.to_json(), "step": [format_rat(s) for s in self.step]}


@dataclass
class NdReconstruction:
    function: PolyhedralFunction
    cells: list  # [(RationalPolyhedron, AffineFunctional)]
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "function": self.function.to_json(),
            "cells": [{"region": region.to_json(), "ambient": functional_to_json(lam)}
                      for region, lam in self.cells],
        }


class _Stop(Exception):
    def __init__(self, outcome: DetectOutcome):
        self.outcome = outcome


def _queries(log: QueryLog) -> list:
    return log.sorted_items()


def _lift_witness(w: dict, line: LineParam) -> dict:
    w = dict(w)
    w["line"] = line.to_json()
    if w.get("kind") == "jensen":
        w["x"] = [format_rat(c) for c in line.at(rat(w["x"][0]))]
        w["y"] = [format_rat(c) for c in line.at(rat(w["y"][0]))]
    elif w.get("kind") == "non-integer-slope":
        w["points"] = [[format_rat(c) for c in line.at(rat(t))] for t in w["segment"]]
        w["midpoint_point"] = [format_rat(c) for c in line.at(rat(w["midpoint"]))]
    return w


def detect_on_line(ask: Callable, line: LineParam, budget: int = DEFAULT_BUDGET,
                   integer_slopes: bool = True) -> DetectOutcome:
    """One-variable detection of ``t -> ask(line.at(t))`` over the line's interval.

    Witnesses of a Reject are lifted back to ambient points and tagged with
    the line.
    """
    if line.lo is None or line.hi is None:
        raise ValueError("detection needs a bounded line interval")

    def g(tt):
        return ask(line.at(tt[0]))

    run = reconstruct_transintegral if integer_slopes else reconstruct_convex
    out = run(g, line.lo, line.hi, budget)
    if out.rejected:
        out.witness = _lift_witness(out.witness, line)
    elif out.exhausted:
        out.report = dict(out.report, line=line.to_json())
    return out


def _full_dim(verts: list, n: int) -> bool:
    if len(verts) <= n:
        return False
    diffs = [[a - b for a, b in zip(v, verts[0])] for v in verts[1:]]
    return exact.rank(diffs) == n


def _grid_points(lows, highs, step: Fraction) -> list[Point]:
    axes = []
    for lo, hi in zip(lows, highs):
        vals = []
        v = lo
        while v < hi:
            vals.append(v)
            v += step
        vals.append(hi)
        axes.append(vals)
    return [tuple(p) for p in itertools.product(*axes)]


def _snap_down(v: Fraction, origin: Fraction, step: Fraction) -> Fraction:
    return origin + math.floor((v - origin) / step) * step


def _snap_up(v: Fraction, origin: Fraction, step: Fraction) -> Fraction:
    return origin + math.ceil((v - origin) / step) * step


def _prime(p: int) -> bool:
    return p >= 2 and all(p % d for d in range(2, math.isqrt(p) + 1))


def _coprime_interior_point(D: RationalPolyhedron, center: Point, s: int) -> Point:
    """A point strictly inside D near ``center`` whose coordinates have a prime denominator not dividing s."""
    p = 2
    while True:
        if _prime(p) and s % p != 0:
            q = tuple(Fraction(round(c * p), p) for c in center)
            if all(f(q) > 0 for f in D.functionals):
                return q
        p += 1


class _BoxReconstructor:
    def __init__(self, ask: QueryLog, grid: GridSpec, budget: int, mode: IntegralityClass,
                 region: Optional[RationalPolyhedron], refinements: int):
        self.ask = ask
        self.grid = grid
        self.n = grid.n
        self.budget = budget
        self.mode = mode
        self.refinements = refinements
        dom = grid.box.polyhedron()
        self.domain = dom if region is None else dom.intersect(region)
        self.lines: dict = {}

    def line(self, p: Point, i: int):
        base = tuple(Fraction(0) if j == i else c for j, c in enumerate(p))
        if base + (i,) in self.lines:
            return self.lines[base + (i,)]
        e = basis_vector(self.n, i)
        iv = line_interval(self.domain, base, e)
        rec = None
        if iv is not None and iv[0] < iv[1]:
            line = LineParam(base, e, iv[0], iv[1])
            out = detect_on_line(self.ask, line, self.budget, self.mode != IntegralityClass.GENERAL)
            if not out.accepted:
                if out.rejected:
                    out.witness["axis"] = i
                raise _Stop(out)
            rec = out.reconstruction
        self.lines[base + (i,)] = rec
        return rec

    def candidate(self, p: Point) -> Optional[AffineFunctional]:
        if not self.domain.contains(p):
            return None
        slopes = []
        for i in range(self.n):
            rec = self.line(p, i)
            # kinks at a line's ends are invisible to it
            if rec is None or p[i] in rec.breakpoints or p[i] in rec.interval:
                return None
            k = sum(1 for b in rec.breakpoints if b < p[i])
            slopes.append(Fraction(rec.pieces[k][0]))
        value = self.ask(p)
        return AffineFunctional(tuple(slopes), value - sum(s * c for s, c in zip(slopes, p)))

    def certify(self, pool: set):
        # a sound candidate minorizes the oracle everywhere; drop refuted ones
        logged = list(self.ask.entries.items())
        pool = {lam for lam in pool if all(lam(x) <= v for x, v in logged)}
        if not pool:
            return [], [(self.domain, None, vertices(self.domain), [])]
        fs = canonicalize(PolyhedralFunction(self.n, tuple(sorted(pool)))).functionals
        cells, failing = [], []
        for lam in fs:
            D = RationalPolyhedron.from_functionals(
                self.n, list(self.domain.functionals) + [lam - mu for mu in fs if mu != lam])
            verts = vertices(D)
            if not _full_dim(verts, self.n):
                continue
            center = tuple(sum(c) / len(verts) for c in zip(*verts))
            bad = [x for x in verts + [center] if self.ask(x) != lam(x)]
            if not bad and strictly_inside_hull(verts, center):
                cells.append((D, lam, verts, center))
            else:
                failing.append((D, lam, verts, bad))
        return cells, failing

    def run(self) -> DetectOutcome:
        n = self.n
        box = self.grid.box
        if dimension(self.domain) < n:
            raise ValueError("region meets the box in a lower-dimensional set")
        step = min(self.grid.step)
        nodes = [tuple(p) for p in itertools.product(*(self.grid.axis_values(i) for i in range(n)))
                 if self.domain.contains(p)]
        # every axis line first, axis 0 first, so Rejects surface deterministically
        for i in range(n):
            for p in nodes:
                self.line(p, i)
        if self.mode == IntegralityClass.INTEGRAL:
            for p in nodes:
                details = membership_details(self.ask(p), p)
                if not details["member"]:
                    raise _Stop(reject({"kind": "membership", **details}, _queries(self.ask)))
        pool = {lam for lam in map(self.candidate, nodes) if lam is not None}
        rounds = 0
        while True:
            cells, failing = self.certify(pool)
            if not failing and cells:
                break
            if rounds == self.refinements + LOCAL_REFINEMENTS:
                return exhausted({
                    "reason": "domains not certified after refinement",
                    "rounds": rounds,
                    "uncertified": [functional_to_json(lam) if lam is not None else None
                                    for _, lam, _, _ in failing],
                }, _queries(self.ask))
            rounds += 1
            step /= 2
            fresh = set()
            for D, lam, verts, bad in failing:
                # whole cells first, then only the neighbourhoods of mismatches
                spans = [verts] if rounds <= self.refinements else []
                spans += [[tuple(c - 2 * step for c in x), tuple(c + 2 * step for c in x)] for x in bad]
                for pts in spans:
                    lows = [_snap_down(min(c), o, step) for c, o in zip(zip(*pts), box.lows)]
                    highs = [_snap_up(max(c), o, step) for c, o in zip(zip(*pts), box.lows)]
                    lows = [max(a, b) for a, b in zip(lows, box.lows)]
                    highs = [min(a, b) for a, b in zip(highs, box.highs)]
                    fresh.update(_grid_points(lows, highs, step))
                fresh.update(bad)
            for p in sorted(fresh):
                lam = self.candidate(p)
                if lam is not None:
                    pool.add(lam)
        function = canonicalize(PolyhedralFunction(n, tuple(lam for _, lam, _, _ in cells)))
        if self.mode == IntegralityClass.INTEGRAL:
            for D, lam, verts, center in cells:
                s = lam.const.denominator
                q = _coprime_interior_point(D, center, s)
                details = membership_details(self.ask(q), q)
                if not details["member"]:
                    raise _Stop(reject({"kind": "membership", "ambient": functional_to_json(lam), **details},
                                       _queries(self.ask)))
        # a shared log may hold points from neighbouring regions
        for x, v in _queries(self.ask):
            if self.domain.contains(x) and function(x) != v:
                return exhausted({"reason": "reconstruction disagrees with a logged query",
                                  "point": [format_rat(c) for c in x], "value": format_rat(v),
                                  "model": format_rat(function(x))}, _queries(self.ask))
        records = [{"ambient": functional_to_json(lam),
                    "vertices": [[format_rat(c) for c in v] for v in verts],
                    "center": [format_rat(c) for c in center]} for _, lam, verts, center in cells]
        rec = NdReconstruction(function, [(D, lam) for D, lam, _, _ in cells],
                               {"cells": records, "refinement_rounds": rounds})
        return accept(rec, _queries(self.ask))


def reconstruct_box(
    o: Callable,
    grid: GridSpec,
    budget: int = DEFAULT_BUDGET,
    mode: IntegralityClass = IntegralityClass.TRANSINTEGRAL,
    region: Optional[RationalPolyhedron] = None,
    log: Optional[QueryLog] = None,
    refinements: int = MAX_REFINEMENTS,
) -> DetectOutcome:
    """Reconstruct o on ``grid.box`` (optionally clipped to ``region``).

    Accept carries an :class:`NdReconstruction`; the outcome's ``queries``
    are ``(point, value)`` pairs over the ambient space.
    """
    if not 1 <= grid.n <= 3:
        raise DimensionError("box reconstruction supports 1 <= n <= 3")
    if isinstance(o, FunctionOracle) and o.n != grid.n:
        raise DimensionError(f"oracle on R^{o.n} with a grid in R^{grid.n}")
    ask = log if log is not None else QueryLog(o)
    try:
        return _BoxReconstructor(ask, grid, budget, mode, region, refinements).run()
    except _Stop as stop:
        out = stop.outcome
        if not out.queries:
            out.queries = _queries(ask)
        return out


def nd_certificate(out: DetectOutcome, **params) -> dict:
    if not out.accepted:
        raise ValueError("only accepted outcomes carry certificates")
    rec = out.reconstruction
    cert = {"kind": "detectnd", "promise": PROMISE_ND}
    cert.update(rec.to_json())
    cert["cell_checks"] = rec.certificate.get("cells", [])
    cert["queries"] = [[[format_rat(c) for c in x], format_rat(v)] for x, v in out.queries]
    cert["params"] = dict(params)
    cert.update(out.extra)
    return cert


# ---------------------------------------------------------------- slope bounds

@dataclass(frozen=True)
class SlopeInterval:
    direction: Point
    lo: Fraction
    hi: Fraction

    def contains(self, v: Fraction) -> bool:
        return self.lo <= v <= self.hi

    def to_json(self) -> dict:
        return {"direction": [format_rat(c) for c in self.direction],
                "interval": [format_rat(self.lo), format_rat(self.hi)]}


class OrthantError(ValueError):
    """The polyhedron is not contained in an affine orthant."""


def bound_directions(P: RationalPolyhedron) -> list[Point]:
    """Directions z_i whose orthant pairings are all nonzero with mixed signs.

    With M the slopes of the containing orthant, z_i solves ``M z = v_i``
    where ``v_i`` has ``i + 1`` in position i and -1 elsewhere.  For n = 1
    the single direction solves ``M z = 1``.
    """
    combo = containing_orthant(P)
    if combo is None:
        raise OrthantError("polyhedron is not contained in an affine orthant")
    n = P.n
    M = [list(P.functionals[k].slope) for k in combo]
    out = []
    for i in range(n):
        v = [Fraction(i + 1) if j == i else Fraction(-1) for j in range(n)] if n > 1 else [Fraction(1)]
        z = exact.solve_square(M, v)
        out.append(tuple(z))
    return out


def slope_bound(r, P: RationalPolyhedron, directions: Optional[Sequence] = None) -> list[SlopeInterval]:
    """Intervals ``[lo_i, hi_i]`` containing ``mu(z_i)`` for every ambient slope mu on P.

    ``lo_i`` is the least one-sided derivative ``f'(x, z_i)`` over boundary
    points x where z_i enters P, ``hi_i`` the largest ``-f'(x, -z_i)`` where
    it leaves.  Both extremes are attained on relative interiors of the
    pieces (domain of affinity) ∩ (face), which is what gets enumerated.
    """
    f = r.function if isinstance(r, NdReconstruction) else r
    if f.n != P.n:
        raise DimensionError(f"function on R^{f.n}, polyhedron in R^{P.n}")
    if containing_orthant(P) is None:
        raise OrthantError("polyhedron is not contained in an affine orthant")
    if dimension(P) < P.n:
        raise ValueError("polyhedron must be full-dimensional")
    zs = [point(z) for z in directions] if directions is not None else bound_directions(P)
    fs = f.functionals
    pieces = []
    for k, c in enumerate(P.functionals):
        for i, lam in enumerate(fs):
            R = RationalPolyhedron.from_functionals(
                P.n, list(P.functionals) + [-c] + [lam - mu for mu in fs if mu != lam])
            x = relative_interior_point(R)
            if x is not None:
                pieces.append((k, tuple(fs[j] for j in active_set(f, x))))
    out = []
    for z in zs:
        entry = [max(m.linear(z) for m in act) for k, act in pieces if P.functionals[k].linear(z) > 0]
        leave = [min(m.linear(z) for m in act) for k, act in pieces if P.functionals[k].linear(z) < 0]
        if not entry or not leave:
            raise OrthantError(f"direction {format_point(z)} does not cross the polyhedron")
        out.append(SlopeInterval(z, min(entry), max(leave)))
    return out


# ---------------------------------------------------------------- skeleton

class SkeletonError(ValueError):
    """The supplied lines do not meet the skeleton preconditions."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _positive_on_open(lam: AffineFunctional, line: LineParam) -> bool:
    """Is lam > 0 on the open parameter interval of the line?"""
    c0, c1 = lam(line.base), lam.linear(line.direction)
    if c1 == 0:
        return c0 > 0
    for t, sign in ((line.lo, -1), (line.hi, 1)):
        if t is None:
            if c1 * sign < 0:
                return False
        elif c0 + c1 * t < 0:
            return False
    return True


def _on_line(q: Point, line: LineParam) -> bool:
    d = line.direction
    k = next(j for j, c in enumerate(d) if c != 0)
    t = (q[k] - line.base[k]) / d[k]
    return line.at(t) == tuple(q) and line.contains_param(t)


def _has_translate(ray_dir: Point, line: LineParam) -> bool:
    p, _ = primitive_direction(ray_dir)
    q, _ = primitive_direction(line.direction)
    if q == p:
        return line.hi is None
    if q == tuple(-c for c in p):
        return line.lo is None
    return False


def skeleton_problems(P: RationalPolyhedron, lines: Sequence[LineParam]) -> list[str]:
    """Every violated precondition of :func:`detect_on_skeleton`, as text."""
    problems = []
    if P.n > 3:
        problems.append("dimension above 3")
        return problems
    if containing_orthant(P) is None:
        problems.append("polyhedron is not contained in an affine orthant")
        return problems
    if dimension(P) < P.n:
        problems.append("polyhedron has empty interior")
        return problems
    for k, line in enumerate(lines):
        if line.n != P.n:
            problems.append(f"line {k} lives in R^{line.n}")
            continue
        if not all(_positive_on_open(lam, line) for lam in P.functionals):
            problems.append(f"line {k} leaves the interior of the polyhedron")
    for v in vertices(P):
        if not any(line.n == P.n and _on_line(v, line) for line in lines):
            problems.append(f"vertex ({format_point(v)}) is not on any line")
    for F in facets(P)[1:]:
        if dimension(F.region) != 1 or is_bounded(F.region):
            continue
        eqs = [list(P.functionals[k].slope) for k in F.active]
        d = exact.nullspace(eqs, P.n)[0]
        d = tuple(d)
        base = relative_interior_point(F.region)
        if not all(c.linear(d) >= 0 for c in P.functionals):
            d = tuple(-c for c in d)
        if not any(line.n == P.n and _has_translate(d, line) for line in lines):
            problems.append(f"unbounded edge through ({format_point(base)}) along ({format_point(d)}) "
                            f"has no translate among the lines")
    return problems


def default_interior_box(P: RationalPolyhedron) -> GridSpec:
    """A cube around a relative-interior point, as large as fits (radius 1, 1/2, ...)."""
    c = relative_interior_point(P)
    r = Fraction(1)
    while True:
        box = Box(tuple(x - r for x in c), tuple(x + r for x in c))
        if all(P.contains(v) for v in box.corners()):
            return GridSpec(box, r / 2)
        r /= 2


def _truncate(line: LineParam, ray_length: Fraction) -> LineParam:
    """Primitive-integer reparameterization, with infinite ends cut at ray_length."""
    p, c = primitive_direction(line.direction)
    lo = None if line.lo is None else line.lo / c
    hi = None if line.hi is None else line.hi / c
    if lo is None and hi is None:
        lo, hi = -ray_length, ray_length
    elif lo is None:
        lo = hi - ray_length
    elif hi is None:
        hi = lo + ray_length
    return LineParam(line.base, p, lo, hi)


def detect_on_skeleton(
    o: Callable,
    P: RationalPolyhedron,
    lines: Sequence[LineParam],
    budget: int = DEFAULT_BUDGET,
    ray_length=DEFAULT_RAY_LENGTH,
    grid: Optional[GridSpec] = None,
) -> DetectOutcome:
    """Line detections along the skeleton plus a box reconstruction inside P.

    Accept requires every line to Accept, the box to Accept, and the box
    reconstruction restricted to each line to reproduce that line's pieces.
    """
    problems = skeleton_problems(P, lines)
    if problems:
        raise SkeletonError(problems)
    ray_length = rat(ray_length)
    log = o if isinstance(o, QueryLog) else QueryLog(o)
    truncated = [_truncate(line, ray_length) for line in lines]
    accepted = []
    for k, line in enumerate(truncated):
        out = detect_on_line(log, line, budget)
        if not out.accepted:
            (out.witness if out.rejected else out.report)["line_index"] = k
            out.queries = _queries(log)
            return out
        accepted.append(out.reconstruction)
    grid = grid if grid is not None else default_interior_box(P)
    out = reconstruct_box(log, grid, budget, log=log)
    if not out.accepted:
        return out
    g = out.reconstruction.function
    for k, (line, rec) in enumerate(zip(truncated, accepted)):
        mine = [(s, e, (lam.slope[0], lam.const)) for s, e, lam in
                pieces_on_interval(restrict(g, line), line.lo, line.hi)]
        theirs = [(s, e, (Fraction(sl), c)) for s, e, (sl, c) in
                  zip([line.lo, *rec.breakpoints], [*rec.breakpoints, line.hi], rec.pieces)]
        if mine != theirs:
            return exhausted({"reason": "interior reconstruction disagrees with a skeleton line",
                              "line_index": k, "line": line.to_json()}, _queries(log))
    out.queries = _queries(log)
    out.extra = {"lines": [line.to_json() for line in truncated], "grid": grid.to_json(),
                 "ray_length": format_rat(ray_length)}
    return out
