"""Black-box functions on rational points and sampling-based checkers.

A :class:`FunctionOracle` wraps a deterministic map from rational points to
rationals.  Results are cached per exact point, so ``evaluations`` counts
distinct points.  The checkers here are sound but incomplete: a failure
carries an exact witness, a pass only speaks for the sampled points.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .polyfun import PolyhedralFunction
from .polyhedron import RationalPolyhedron
from .ratfun import DimensionError, Point, format_point, format_rat, point, rat


class DomainError(ValueError):
    """A query fell outside the oracle's declared domain."""


class UnknownOracle(KeyError):
    pass


class FunctionOracle:
    def __init__(
        self,
        n: int,
        fn: Callable[[Point], Fraction],
        domain: Optional[RationalPolyhedron] = None,
        name: str = "anonymous",
        cache: bool = True,
    ):
        if domain is not None and domain.n != n:
            raise DimensionError(f"domain in R^{domain.n} for an oracle on R^{n}")
        self.n = n
        self.name = name
        self.domain = domain if domain is not None else RationalPolyhedron.whole_space(n)
        self._fn = fn
        self._cache: Optional[dict] = {} if cache else None
        self._lock = threading.Lock()
        self.evaluations = 0
        self.calls = 0

    def __repr__(self) -> str:
        return f"FunctionOracle({self.name!r}, n={self.n})"

    def in_domain(self, x: Sequence[Fraction]) -> bool:
        return self.domain.contains(x)

    def query(self, x: Sequence) -> Fraction:
        x = point(x)
        if len(x) != self.n:
            raise DimensionError(f"query of dimension {len(x)} to an oracle on R^{self.n}")
        if not self.domain.contains(x):
            raise DomainError(f"query {format_point(x)} outside the domain of {self.name}")
        with self._lock:
            self.calls += 1
            if self._cache is not None and x in self._cache:
                return self._cache[x]
        value = rat(self._fn(x))
        with self._lock:
            if self._cache is not None:
                if x not in self._cache:
                    self._cache[x] = value
                    self.evaluations += 1
                return self._cache[x]
            self.evaluations += 1
        return value

    __call__ = query

    def restricted(self, domain: RationalPolyhedron) -> FunctionOracle:
        """The same function on a smaller domain (sharing nothing mutable)."""
        return FunctionOracle(self.n, self._fn, self.domain.intersect(domain), self.name)


class QueryLog:
    """Records every (point, value) a detector asks an oracle for."""

    def __init__(self, oracle: FunctionOracle):
        self.oracle = oracle
        self.entries: dict = {}

    def __call__(self, x: Sequence) -> Fraction:
        x = point(x)
        v = self.oracle(x)
        self.entries[x] = v
        return v

    def merge(self, other: QueryLog) -> None:
        self.entries.update(other.entries)

    def sorted_items(self) -> list:
        return sorted(self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Box:
    """Closed rational box ``prod [lows[i], highs[i]]``."""

    lows: Point
    highs: Point

    def __post_init__(self):
        lows, highs = point(self.lows), point(self.highs)
        if len(lows) != len(highs):
            raise DimensionError("box corners differ in dimension")
        if any(a > b for a, b in zip(lows, highs)):
            raise ValueError("box has a negative side")
        object.__setattr__(self, "lows", lows)
        object.__setattr__(self, "highs", highs)

    @classmethod
    def cube(cls, n: int, lo, hi) -> Box:
        return cls((rat(lo),) * n, (rat(hi),) * n)

    @property
    def n(self) -> int:
        return len(self.lows)

    def polyhedron(self) -> RationalPolyhedron:
        return RationalPolyhedron.box(self.lows, self.highs)

    def axis_values(self, i: int, step: Fraction) -> list[Fraction]:
        """Grid coordinates along axis i; the far end is always included."""
        step = rat(step)
        if step <= 0:
            raise ValueError("resolution must be positive")
        lo, hi = self.lows[i], self.highs[i]
        vals = []
        v = lo
        while v < hi:
            vals.append(v)
            v += step
        vals.append(hi)
        return vals

    def grid(self, step) -> list[Point]:
        return [tuple(p) for p in itertools.product(*(self.axis_values(i, step) for i in range(self.n)))]

    def corners(self) -> list[Point]:
        return [tuple(p) for p in itertools.product(*zip(self.lows, self.highs))]

    def center(self) -> Point:
        return tuple((a + b) / 2 for a, b in zip(self.lows, self.highs))

    def contains(self, x: Sequence[Fraction]) -> bool:
        return all(a <= v <= b for a, v, b in zip(self.lows, x, self.highs))

    def to_json(self) -> list:
        return [[format_rat(a), format_rat(b)] for a, b in zip(self.lows, self.highs)]


def from_polyfun(f: PolyhedralFunction, domain: Optional[RationalPolyhedron] = None, name: str = "polyfun") -> FunctionOracle:
    if domain is not None and domain.n != f.n:
        raise DimensionError(f"domain in R^{domain.n} for a function on R^{f.n}")
    return FunctionOracle(f.n, f, domain, name)


def _square(x):
    return x[0] * x[0]


def _sawtooth(x):
    t = x[0]
    if t <= 0:
        return -t
    if t <= 1:
        return t
    return Fraction(1)


def _min2d(x):
    return min(x[0], x[1])


def _builtin_specs() -> dict:
    half = Fraction(1, 2)
    return {
        "square": (1, _square, "t -> t^2 (convex, not polyhedral)"),
        "halfslope": (1, PolyhedralFunction.of(((half,), 0), ((0,), 0)), "max(t/2, 0)"),
        "abs": (1, PolyhedralFunction.of(((1,), 0), ((-1,), 0)), "max(t, -t)"),
        "sawtooth-nonconvex": (1, _sawtooth, "-t on t<=0, t on [0,1], 1 on t>=1 (concave kink at 1)"),
        "trop-conic": (2, PolyhedralFunction.of(((2, 0), 0), ((1, 1), 0), ((0, 2), 0), ((0, 0), 0)),
                       "max(2x, x+y, 2y, 0)"),
        "min2d": (2, _min2d, "min(x, y) (concave along every axis line)"),
        "halfslope2d": (2, PolyhedralFunction.of(((half, 0), 0), ((0, 1), 0), ((0, 0), 0)),
                        "max(x/2, y, 0)"),
    }


BUILTIN_NAMES = tuple(sorted(_builtin_specs()))


def builtin_oracle(name: str) -> FunctionOracle:
    specs = _builtin_specs()
    if name not in specs:
        raise UnknownOracle(f"unknown builtin oracle {name!r}; known: {', '.join(sorted(specs))}")
    n, fn, _ = specs[name]
    return FunctionOracle(n, fn, None, name)


def builtin_description(name: str) -> str:
    return _builtin_specs()[name][2]


@dataclass(frozen=True)
class ConvexityReport:
    passed: bool
    witness: Optional[dict] = None
    queries_used: int = 0
    sample: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness,
                "queries_used": self.queries_used, "sample": self.sample}


def jensen_violation(fx: Fraction, fy: Fraction, fm: Fraction, t: Fraction) -> bool:
    """True when ``t f(x) + (1-t) f(y) < f(t x + (1-t) y)``."""
    return t * fx + (1 - t) * fy < fm


def _witness(x, y, t, fx, fy, fm) -> dict:
    return {
        "x": [format_rat(c) for c in x], "y": [format_rat(c) for c in y], "t": format_rat(t),
        "f(x)": format_rat(fx), "f(y)": format_rat(fy), "f(tx+(1-t)y)": format_rat(fm),
        "chord": format_rat(t * fx + (1 - t) * fy),
    }


def witness_violates(o: Callable, witness: dict) -> bool:
    """Recompute a Jensen witness from scratch against ``o``."""
    x = point(witness["x"])
    y = point(witness["y"])
    t = rat(witness["t"])
    mid = tuple(t * a + (1 - t) * b for a, b in zip(x, y))
    return jensen_violation(o(x), o(y), o(mid), t)


def jensen_check(o: FunctionOracle, pairs: Iterable[tuple], ts: Sequence) -> ConvexityReport:
    pairs = [(point(x), point(y)) for x, y in pairs]
    ts = [rat(t) for t in ts]
    if any(not 0 <= t <= 1 for t in ts):
        raise ValueError("Jensen weights must lie in [0, 1]")
    seen = set()

    def ask(p):
        seen.add(p)
        return o(p)

    for x, y in pairs:
        fx, fy = ask(x), ask(y)
        for t in ts:
            mid = tuple(t * a + (1 - t) * b for a, b in zip(x, y))
            fm = ask(mid)
            if jensen_violation(fx, fy, fm, t):
                return ConvexityReport(False, _witness(x, y, t, fx, fy, fm), len(seen),
                                       f"{len(pairs)} pairs x {len(ts)} weights")
    return ConvexityReport(True, None, len(seen), f"{len(pairs)} pairs x {len(ts)} weights")


def _axis_lines(box: Box, resolution):
    """Yield (axis, list of grid points along one axis-parallel grid line)."""
    values = [box.axis_values(i, resolution) for i in range(box.n)]
    for i in range(box.n):
        others = [values[j] if j != i else [None] for j in range(box.n)]
        for fixed in itertools.product(*others):
            pts = []
            for v in values[i]:
                p = list(fixed)
                p[i] = v
                pts.append(tuple(p))
            yield i, pts


def axis_convexity_check(o: FunctionOracle, box: Box, resolution) -> ConvexityReport:
    """Discrete convexity of o along every axis-parallel grid line of the box.

    Each interior grid point is tested against its two neighbours with
    weight 1/2, which is the complete test for convexity of the sampled
    values on an evenly spaced line.  A trailing uneven step (when the
    resolution does not divide a side) uses the matching weight.
    """
    seen = set()
    lines = 0
    for axis, pts in _axis_lines(box, resolution):
        lines += 1
        for p in pts:
            seen.add(p)
        for a, m, b in zip(pts, pts[1:], pts[2:]):
            t = (b[axis] - m[axis]) / (b[axis] - a[axis])
            fa, fm, fb = o(a), o(m), o(b)
            if jensen_violation(fa, fb, fm, t):
                w = _witness(a, b, t, fa, fb, fm)
                w["axis"] = axis
                return ConvexityReport(False, w, len(seen), f"{lines} axis lines at resolution {format_rat(rat(resolution))}")
    return ConvexityReport(True, None, len(seen), f"{lines} axis lines at resolution {format_rat(rat(resolution))}")


def lipschitz_estimate(o: FunctionOracle, box: Box, resolution) -> Fraction:
    """Largest absolute secant slope between axis-adjacent grid points."""
    best = Fraction(0)
    for axis, pts in _axis_lines(box, resolution):
        for a, b in zip(pts, pts[1:]):
            h = b[axis] - a[axis]
            if h == 0:
                continue
            best = max(best, abs(o(b) - o(a)) / h)
    return best
