"""Reconstruct convex integer-slope piecewise-affine functions of one variable.

Everything here works from oracle queries only.  The key primitive is the
midpoint-on-chord test: for a convex function, ``f((x+e)/2)`` equal to the
chord value certifies that f is affine on ``[x, e]``, which pins down an
exact one-sided slope.  Slopes at the two ends of an interval then either
agree (one affine piece) or their support lines meet at a point where one
more query decides between "two pieces" and "split and recurse".

Accept is sound relative to the promise that the oracle is convex on the
interval; any Jensen violation among the logged queries turns into a Reject.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .oracle import FunctionOracle, jensen_violation
from .polyfun import PolyhedralFunction, canonicalize
from .ratfun import AffineFunctional, format_rat, membership_details, rat

DEFAULT_BUDGET = 64
PROMISE_1D = "convex-on-interval"
MAX_SAMPLE_DENOMINATOR = 64


@dataclass(frozen=True)
class SlopeProbe:
    """An exact slope certified on the affine segment between ``start`` and ``end``."""

    slope: Fraction
    start: Fraction
    end: Fraction
    halvings: int


class _Exhausted:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "EXHAUSTED"

    def __bool__(self) -> bool:
        return False


EXHAUSTED = _Exhausted()


@dataclass(frozen=True)
class Reconstruction1D:
    pieces: tuple  # ((slope, const), ...) with strictly increasing slopes
    breakpoints: tuple
    interval: tuple

    def __call__(self, t) -> Fraction:
        t = rat(t)
        return max(s * t + c for s, c in self.pieces)

    def as_function(self) -> PolyhedralFunction:
        return PolyhedralFunction(1, tuple(AffineFunctional((Fraction(s),), c) for s, c in self.pieces))

    def to_json(self) -> dict:
        return {
            "interval": [format_rat(self.interval[0]), format_rat(self.interval[1])],
            "pieces": [{"slope": int(s), "const": format_rat(c)} for s, c in self.pieces],
            "breakpoints": [format_rat(b) for b in self.breakpoints],
        }


@dataclass
class DetectOutcome:
    """Accept (reconstruction + query log), Reject (witness) or Exhausted."""

    tag: str
    reconstruction: object = None
    queries: list = field(default_factory=list)
    witness: Optional[dict] = None
    report: Optional[dict] = None
    extra: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.tag == "accept"

    @property
    def rejected(self) -> bool:
        return self.tag == "reject"

    @property
    def exhausted(self) -> bool:
        return self.tag == "exhausted"

    def certificate(self, **params) -> dict:
        if not self.accepted:
            raise ValueError("only accepted outcomes carry certificates")
        cert = {"kind": "detect1d", "promise": PROMISE_1D}
        cert.update(self.reconstruction.to_json())
        cert["queries"] = [[format_rat(x), format_rat(v)] for x, v in self.queries]
        cert["params"] = dict(params)
        cert.update(self.extra)
        return cert


def accept(rec, queries, **extra) -> DetectOutcome:
    return DetectOutcome("accept", reconstruction=rec, queries=queries, extra=extra)


def reject(witness: dict, queries=()) -> DetectOutcome:
    return DetectOutcome("reject", witness=witness, queries=list(queries))


def exhausted(report: dict, queries=()) -> DetectOutcome:
    return DetectOutcome("exhausted", report=report, queries=list(queries))


class _Stop(Exception):
    def __init__(self, outcome_kind: str, payload: dict):
        self.kind = outcome_kind
        self.payload = payload


class _Logged:
    """Query recorder over a one-variable oracle."""

    def __init__(self, o: Callable, lo: Fraction, hi: Fraction):
        self.o = o
        self.lo, self.hi = lo, hi
        self.log: dict = {}

    def __call__(self, t: Fraction) -> Fraction:
        if not self.lo <= t <= self.hi:
            raise ValueError(f"query {format_rat(t)} outside [{format_rat(self.lo)}, {format_rat(self.hi)}]")
        v = self.log.get(t)
        if v is None:
            v = rat(self.o((t,)))
            self.log[t] = v
        return v


def _probe(f: Callable, x: Fraction, sign: int, h0: Fraction, budget: int):
    fx = f(x)
    h = h0
    for k in range(budget + 1):
        e = x + sign * h
        m = x + sign * h / 2
        fe, fm = f(e), f(m)
        if 2 * fm == fx + fe:
            return SlopeProbe((fe - fx) / (e - x), min(x, e), max(x, e), k)
        h /= 2
    return EXHAUSTED


def one_sided_slope(o: FunctionOracle, x, sign: int, h0, budget: int = DEFAULT_BUDGET, interval=None):
    """Slope of the affine piece just to the right (sign=+1) or left (sign=-1) of x.

    Halves ``h`` from ``h0`` until ``x + sign*h/2`` lies exactly on the chord
    of ``[x, x + sign*h]``.  The returned slope is the ordinary ``df/dt`` of
    that segment.  EXHAUSTED after ``budget`` halvings.
    """
    x, h0 = rat(x), rat(h0)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    if interval is not None:
        lo, hi = rat(interval[0]), rat(interval[1])
        if not (lo <= x <= hi and lo <= x + sign * h0 <= hi):
            raise ValueError("probe segment leaves the interval")
        ask = _Logged(o, lo, hi)
    else:
        def ask(t):
            return rat(o((t,)))
    return _probe(ask, x, sign, h0, budget)


def _jensen_scan(log: dict) -> Optional[dict]:
    """First violating consecutive triple among logged 1-D samples."""
    pts = sorted(log.items())
    for (a, fa), (m, fm), (b, fb) in zip(pts, pts[1:], pts[2:]):
        t = (b - m) / (b - a)
        if jensen_violation(fa, fb, fm, t):
            return {
                "kind": "jensen", "x": [format_rat(a)], "y": [format_rat(b)], "t": format_rat(t),
                "f(x)": format_rat(fa), "f(y)": format_rat(fb), "f(tx+(1-t)y)": format_rat(fm),
                "chord": format_rat(t * fa + (1 - t) * fb),
            }
    return None


def _breaks(pieces) -> tuple:
    return tuple((c1 - c2) / (s2 - s1) for (s1, c1), (s2, c2) in zip(pieces, pieces[1:]))


class _Reconstructor:
    def __init__(self, f: _Logged, a: Fraction, b: Fraction, budget: int, require_integer: bool):
        self.f = f
        self.a, self.b = a, b
        self.budget = budget
        self.require_integer = require_integer

    def probe(self, x: Fraction, sign: int, lo: Fraction, hi: Fraction) -> SlopeProbe:
        h0 = (hi - lo) / 2
        p = _probe(self.f, x, sign, h0, self.budget)
        if p is EXHAUSTED:
            raise _Stop("exhausted", {"reason": "slope probe exhausted", "x": format_rat(x),
                                       "sign": sign, "halvings": self.budget})
        if self.require_integer and p.slope.denominator != 1:
            raise _Stop("reject", {
                "kind": "non-integer-slope", "slope": format_rat(p.slope),
                "segment": [format_rat(p.start), format_rat(p.end)],
                "midpoint": format_rat((p.start + p.end) / 2),
                "values": [format_rat(self.f(p.start)), format_rat(self.f((p.start + p.end) / 2)),
                           format_rat(self.f(p.end))],
            })
        return p

    def chord_ok(self, lo: Fraction, hi: Fraction) -> bool:
        return 2 * self.f((lo + hi) / 2) == self.f(lo) + self.f(hi)

    def inconsistent(self, why: str, **where):
        raise _Stop("inconsistent", {"reason": why, **{k: format_rat(v) for k, v in where.items()}})

    def solve(self, lo: Fraction, hi: Fraction, pl: SlopeProbe, ph: SlopeProbe) -> list:
        sl, sh = pl.slope, ph.slope
        flo, fhi = self.f(lo), self.f(hi)
        if sl == sh:
            if not self.chord_ok(lo, hi):
                self.inconsistent("equal end slopes but interval not affine", lo=lo, hi=hi)
            return [(sl, flo - sl * lo)]
        if sl > sh:
            self.inconsistent("end slopes decrease", lo=lo, hi=hi)
        xs = (fhi - flo + sl * lo - sh * hi) / (sl - sh)
        if not lo < xs < hi:
            self.inconsistent("support lines meet outside the interval", lo=lo, hi=hi)
        line = flo + sl * (xs - lo)
        fx = self.f(xs)
        if fx == line:
            if not (self.chord_ok(lo, xs) and self.chord_ok(xs, hi)):
                self.inconsistent("halves not affine", lo=lo, hi=hi)
            return [(sl, flo - sl * lo), (sh, fhi - sh * hi)]
        if fx < line:
            self.inconsistent("value below a support line", x=xs)
        left = self.solve(lo, xs, pl, self.probe(xs, -1, lo, xs))
        right = self.solve(xs, hi, self.probe(xs, 1, xs, hi), ph)
        if left[-1] == right[0]:
            return left + right[1:]
        return left + right

    def run(self) -> list:
        a, b = self.a, self.b
        pa = self.probe(a, 1, a, b)
        pb = self.probe(b, -1, a, b)
        return self.solve(a, b, pa, pb)


def _finish(f: _Logged, a, b, run: Callable[[], list], extra_checks=None) -> DetectOutcome:
    try:
        pieces = run()
    except _Stop as stop:
        violation = _jensen_scan(f.log)
        queries = sorted(f.log.items())
        if violation is not None:
            return reject(violation, queries)
        if stop.kind == "reject":
            return reject(stop.payload, queries)
        return exhausted(stop.payload, queries)
    violation = _jensen_scan(f.log)
    queries = sorted(f.log.items())
    if violation is not None:
        return reject(violation, queries)
    rec = Reconstruction1D(tuple(pieces), _breaks(pieces), (a, b))
    for t, v in queries:
        if rec(t) != v:
            return exhausted({"reason": "reconstruction disagrees with a logged query",
                              "t": format_rat(t), "value": format_rat(v), "model": format_rat(rec(t))},
                             queries)
    return accept(rec, queries)


def reconstruct_transintegral(o, a, b, budget: int = DEFAULT_BUDGET) -> DetectOutcome:
    """Recover a convex piecewise-affine function with integer slopes on ``[a, b]``.

    ``o`` is any callable taking a 1-tuple (typically a one-variable
    FunctionOracle).
    """
    a, b = rat(a), rat(b)
    if not a < b:
        raise ValueError("need a < b")
    f = _Logged(o, a, b)
    return _finish(f, a, b, _Reconstructor(f, a, b, budget, True).run)


def reconstruct_convex(o, a, b, budget: int = DEFAULT_BUDGET) -> DetectOutcome:
    """As :func:`reconstruct_transintegral` but accepting any rational slopes."""
    a, b = rat(a), rat(b)
    if not a < b:
        raise ValueError("need a < b")
    f = _Logged(o, a, b)
    return _finish(f, a, b, _Reconstructor(f, a, b, budget, False).run)


def farey_points(a, b, count: int, max_den: int = MAX_SAMPLE_DENOMINATOR) -> list[Fraction]:
    """Rationals strictly inside ``(a, b)`` by increasing denominator, then value."""
    a, b = rat(a), rat(b)
    out: list[Fraction] = []
    for q in range(1, max_den + 1):
        for p in range(math.floor(a * q), math.ceil(b * q) + 1):
            if math.gcd(p, q) != 1:
                continue
            x = Fraction(p, q)
            if a < x < b:
                out.append(x)
                if len(out) == count:
                    return out
    return out


def _coprime_point(start: Fraction, end: Fraction, s: int) -> Fraction:
    """A point strictly inside (start, end) whose denominator is a prime not dividing s."""
    p = 2
    while True:
        if all(p % d for d in range(2, math.isqrt(p) + 1)) and s % p != 0:
            j = math.floor(start * p) + 1
            while Fraction(j, p) < end:
                if j % p != 0:
                    return Fraction(j, p)
                j += 1
        p += 1


def detect_integral_values(o, a, b, budget: int = DEFAULT_BUDGET, samples: int = 100) -> DetectOutcome:
    """Detect an integral polyhedral function (integer slopes and constants).

    First every sample value must lie in ``Z + Z x``; then the function is
    reconstructed, and each piece is probed at a point whose denominator is
    coprime to that of the piece's constant, which exposes a non-integer
    constant as a membership failure.
    """
    a, b = rat(a), rat(b)
    if not a < b:
        raise ValueError("need a < b")
    f = _Logged(o, a, b)
    for x in farey_points(a, b, samples):
        v = f(x)
        details = membership_details(v, (x,))
        if not details["member"]:
            return reject({"kind": "membership", **details}, sorted(f.log.items()))
    out = _finish(f, a, b, _Reconstructor(f, a, b, budget, True).run)
    if not out.accepted:
        return out
    rec = out.reconstruction
    edges = [a, *rec.breakpoints, b]
    for k, (s, c) in enumerate(rec.pieces):
        x = _coprime_point(edges[k], edges[k + 1], c.denominator)
        v = f(x)
        details = membership_details(v, (x,))
        if not details["member"]:
            return reject({"kind": "membership", "piece": k, "piece_slope": int(s),
                           "piece_const": format_rat(c), **details}, sorted(f.log.items()))
    queries = sorted(f.log.items())
    out.queries = queries
    return out


def reconstruction_matches(rec: Reconstruction1D, g: PolyhedralFunction) -> bool:
    """Do ``rec`` and the one-variable function g agree as canonical forms?"""
    return canonicalize(rec.as_function()).functionals == canonicalize(g).functionals
