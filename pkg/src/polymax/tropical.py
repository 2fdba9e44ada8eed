"""Tropical polynomials and detection through restrictions to tropical lines.

Conventions are max-plus: tropical addition is ``max`` and tropical
multiplication is ``+``.  The tropical line centred at c is the union of
three rays out of c, pointing down, left and along the diagonal (1, 1).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .detect1d import DEFAULT_BUDGET, DetectOutcome, accept, exhausted
from .detectnd import (
    DEFAULT_RAY_LENGTH,
    DEFAULT_STEP,
    GridSpec,
    NdReconstruction,
    detect_on_line,
    reconstruct_box,
)
from .oracle import Box, DomainError, FunctionOracle, QueryLog
from .polyfun import LineParam, PolyhedralFunction, breakpoints, canonicalize, pieces_on_interval, restrict
from .polyhedron import RationalPolyhedron, dimension, is_bounded, vertices
from .ratfun import AffineFunctional, DimensionError, Point, format_point, format_rat, point, rat

RAY_TAGS = ("down", "left", "diag")
RAY_DIRECTIONS = {
    "down": (Fraction(0), Fraction(-1)),
    "left": (Fraction(-1), Fraction(0)),
    "diag": (Fraction(1), Fraction(1)),
}
PROMISE_TROPICAL = "convex-on-box; tropical-line restrictions checked at the listed centers only"


def is_tropical_polynomial(f: PolyhedralFunction) -> bool:
    """Canonical slopes all in the nonnegative integers."""
    return all(a.denominator == 1 and a >= 0 for lam in canonicalize(f).functionals for a in lam.slope)


@dataclass(frozen=True)
class TropicalLineTranslate:
    center: Point

    def __post_init__(self):
        c = point(self.center)
        if len(c) != 2:
            raise DimensionError("tropical lines live in the plane")
        object.__setattr__(self, "center", c)

    def ray(self, tag: str, length: Optional[Fraction] = None) -> LineParam:
        return LineParam(self.center, RAY_DIRECTIONS[tag], Fraction(0), None if length is None else rat(length))

    @property
    def rays(self) -> dict:
        return {tag: self.ray(tag) for tag in RAY_TAGS}

    def contains(self, x: Sequence[Fraction]) -> bool:
        dx, dy = (a - b for a, b in zip(point(x), self.center))
        return (dx == 0 and dy <= 0) or (dy == 0 and dx <= 0) or (dx == dy and dx >= 0)

    def components(self) -> dict:
        """The closures of the three regions cut out by the line, as polyhedra."""
        cx, cy = self.center

        def P(*fs):
            return RationalPolyhedron.from_functionals(2, [AffineFunctional.of(s, c) for s, c in fs])

        return {
            # x' >= y', x' >= 0  (bounded by diag and down)
            "east": P(((1, -1), cy - cx), ((1, 0), -cx)),
            # y' >= x', y' >= 0  (bounded by diag and left)
            "north": P(((-1, 1), cx - cy), ((0, 1), -cy)),
            # x' <= 0, y' <= 0  (bounded by left and down)
            "southwest": P(((-1, 0), cx), ((0, -1), cy)),
        }


COMPONENT_RAYS = {"east": ("diag", "down"), "north": ("diag", "left"), "southwest": ("left", "down")}


def _on_half_line(g: PolyhedralFunction) -> PolyhedralFunction:
    """Minimal form of a canonical one-variable g on ``t >= 0``."""
    fs = sorted(g.functionals)
    bps = breakpoints(g)
    return PolyhedralFunction(1, tuple(lam for k, lam in enumerate(fs) if k == len(bps) or bps[k] > 0))


def restrict_to_tropical_line(f, c, ray_length=DEFAULT_RAY_LENGTH) -> dict:
    """The three ray restrictions ``t -> f(c + t d)``, ``t >= 0``, keyed by tag.

    Symbolic input gives one-variable functions in minimal form on
    ``t >= 0``; an oracle gives one-variable oracles on ``[0, ray_length]``.
    """
    L = TropicalLineTranslate(c)
    if isinstance(f, PolyhedralFunction):
        if f.n != 2:
            raise DimensionError("tropical lines live in the plane")
        return {tag: _on_half_line(restrict(f, L.ray(tag))) for tag in RAY_TAGS}
    ray_length = rat(ray_length)
    if ray_length <= 0:
        raise ValueError("ray length must be positive")
    out = {}
    for tag in RAY_TAGS:
        ray = L.ray(tag, ray_length)
        domain = getattr(f, "domain", None)
        if domain is not None and not (domain.contains(ray.at(0)) and domain.contains(ray.at(ray_length))):
            raise DomainError(f"{tag} ray from ({format_point(L.center)}) leaves the oracle domain")

        def g(tt, ray=ray):
            return f(ray.at(tt[0]))

        out[tag] = FunctionOracle(1, g, RationalPolyhedron.box((0,), (ray_length,)), name=f"{tag}-ray")
    return out


def _bounding_box(o) -> Box:
    domain = getattr(o, "domain", None)
    if domain is None or not domain.halfspaces or not is_bounded(domain):
        raise ValueError("a bounded box is required for this oracle")
    vs = vertices(domain)
    return Box(tuple(min(c) for c in zip(*vs)), tuple(max(c) for c in zip(*vs)))


def detect_tropical(
    o: Callable,
    centers: Sequence,
    ray_length=DEFAULT_RAY_LENGTH,
    budget: int = DEFAULT_BUDGET,
    box: Optional[Box] = None,
    step=DEFAULT_STEP,
) -> DetectOutcome:
    """Ray evidence at every center, then a component-wise reconstruction.

    The three closed components of the box minus the tropical line through
    the lexicographically smallest center are reconstructed separately;
    each must agree with that center's ray reconstructions on its two
    bounding rays.  Accept returns the canonical max of the pieces.
    """
    if not centers:
        raise ValueError("at least one center is required")
    if isinstance(o, FunctionOracle) and o.n != 2:
        raise DimensionError("tropical detection works in the plane")
    box = box if box is not None else _bounding_box(o)
    if box.n != 2:
        raise DimensionError("tropical detection works in the plane")
    ray_length = rat(ray_length)
    lines = [TropicalLineTranslate(c) for c in centers]
    log = QueryLog(o)
    ray_recs = {}
    for L in lines:
        for tag in RAY_TAGS:
            ray = L.ray(tag, ray_length)
            if not (box.contains(ray.at(0)) and box.contains(ray.at(ray_length))):
                raise DomainError(f"{tag} ray from ({format_point(L.center)}) leaves the box")
            out = detect_on_line(log, ray, budget)
            if not out.accepted:
                where = {"center": [format_rat(c) for c in L.center], "ray": tag}
                if out.rejected:
                    out.witness.update(where)
                else:
                    out.report.update(where)
                out.queries = log.sorted_items()
                return out
            ray_recs[(L.center, tag)] = out.reconstruction
    main = min(lines, key=lambda L: L.center)
    grid = GridSpec(box, step)
    functions, cells, records = [], [], {}
    for name, region in main.components().items():
        if dimension(box.polyhedron().intersect(region)) < 2:
            continue
        out = reconstruct_box(log, grid, budget, region=region, log=log)
        if not out.accepted:
            (out.witness if out.rejected else out.report)["component"] = name
            out.queries = log.sorted_items()
            return out
        g = out.reconstruction.function
        for tag in COMPONENT_RAYS[name]:
            rec = ray_recs[(main.center, tag)]
            ray = main.ray(tag, ray_length)
            mine = [(s, e, (lam.slope[0], lam.const)) for s, e, lam in
                    pieces_on_interval(restrict(g, ray), Fraction(0), ray_length)]
            theirs = [(s, e, (Fraction(sl), c)) for s, e, (sl, c) in
                      zip([Fraction(0), *rec.breakpoints], [*rec.breakpoints, ray_length], rec.pieces)]
            if mine != theirs:
                return exhausted({"reason": "component disagrees with a bounding ray",
                                  "component": name, "ray": tag}, log.sorted_items())
        functions.append(g)
        cells.extend(out.reconstruction.cells)
        records[name] = out.reconstruction.certificate
    function = canonicalize(PolyhedralFunction(2, tuple(lam for g in functions for lam in g.functionals)))
    queries = log.sorted_items()
    for x, v in queries:
        if function(x) != v:
            return exhausted({"reason": "reconstruction disagrees with a logged query",
                              "point": [format_rat(c) for c in x], "value": format_rat(v)}, queries)
    checks = [c for name in records for c in records[name]["cells"]]
    rec = NdReconstruction(function, cells, {"cells": checks, "components": sorted(records)})
    return accept(rec, queries,
                  centers=[[format_rat(c) for c in L.center] for L in lines],
                  designated_center=[format_rat(c) for c in main.center],
                  ray_length=format_rat(ray_length),
                  grid=grid.to_json(),
                  promise=PROMISE_TROPICAL)
