"""Max-of-affine functions with exact rational data.

A :class:`PolyhedralFunction` is ``x -> max_i lambda_i(x)`` for a finite,
nonempty list of affine functionals.  The module provides the tropical
semiring operations (max as addition, + as multiplication), a canonical
minimal representation, restriction to lines, exact directional
derivatives, domains of affinity and the partial-infimum transform
``g_m(t) = inf_u f(x1 + t(x2 - x1) + u z) - m u`` for plane functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from . import exact
from .polyhedron import RationalPolyhedron
from .ratfun import (
    AffineFunctional,
    DimensionError,
    IntegralityClass,
    Point,
    axpy,
    classify_functional,
    format_rat,
    functional_from_json,
    functional_to_json,
    point,
    rat,
    sub,
)


@dataclass(frozen=True)
class PolyhedralFunction:
    n: int
    functionals: tuple

    def __post_init__(self):
        fs = tuple(self.functionals)
        if not fs:
            raise ValueError("a polyhedral function needs at least one functional")
        for f in fs:
            if f.n != self.n:
                raise DimensionError(f"functional of dimension {f.n} in a function on R^{self.n}")
        object.__setattr__(self, "functionals", fs)

    @classmethod
    def of(cls, *terms) -> PolyhedralFunction:
        """Build from ``(slope, const)`` pairs, e.g. ``of(((1, 1), 0), ((0, 0), 0))``."""
        fs = tuple(AffineFunctional.of(s, c) for s, c in terms)
        return cls(fs[0].n, fs)

    @classmethod
    def constant(cls, n: int, c=0) -> PolyhedralFunction:
        return cls(n, (AffineFunctional((0,) * n, rat(c)),))

    def __call__(self, x: Sequence[Fraction]) -> Fraction:
        return eval(self, x)

    def __len__(self) -> int:
        return len(self.functionals)

    def __str__(self) -> str:
        return "max(" + ", ".join(str(f) for f in self.functionals) + ")"

    def to_json(self) -> dict:
        return {"n": self.n, "functionals": [functional_to_json(f) for f in self.functionals]}

    @classmethod
    def from_json(cls, obj: dict) -> PolyhedralFunction:
        try:
            n = obj["n"]
            fs = obj["functionals"]
        except (KeyError, TypeError):
            raise ValueError("function JSON needs 'n' and 'functionals'") from None
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"n: expected a positive integer, got {n!r}")
        if not isinstance(fs, list) or not fs:
            raise ValueError("functionals: expected a nonempty list")
        return cls(n, tuple(functional_from_json(f, n) for f in fs))


def _check_dim(f: PolyhedralFunction, x: Sequence) -> None:
    if len(x) != f.n:
        raise DimensionError(f"point of dimension {len(x)} for a function on R^{f.n}")


def eval(f: PolyhedralFunction, x: Sequence[Fraction]) -> Fraction:  # noqa: A001
    _check_dim(f, x)
    return max(lam(x) for lam in f.functionals)


def active_set(f: PolyhedralFunction, x: Sequence[Fraction]) -> frozenset:
    _check_dim(f, x)
    values = [lam(x) for lam in f.functionals]
    top = max(values)
    return frozenset(i for i, v in enumerate(values) if v == top)


def _same_dim(f: PolyhedralFunction, g: PolyhedralFunction) -> None:
    if f.n != g.n:
        raise DimensionError(f"functions on R^{f.n} and R^{g.n}")


def trop_add(f: PolyhedralFunction, g: PolyhedralFunction) -> PolyhedralFunction:
    _same_dim(f, g)
    return canonicalize(PolyhedralFunction(f.n, f.functionals + g.functionals))


def trop_mul(f: PolyhedralFunction, g: PolyhedralFunction) -> PolyhedralFunction:
    _same_dim(f, g)
    sums = tuple(a + b for a in f.functionals for b in g.functionals)
    return canonicalize(PolyhedralFunction(f.n, sums))


def _upper_hull_1d(fs: list[AffineFunctional]) -> list[AffineFunctional]:
    """Functionals on the strict upper hull of the (slope, const) points.

    ``fs`` must have distinct slopes and be sorted by slope.
    """
    hull: list[AffineFunctional] = []
    for f in fs:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # b is redundant when it lies on or below the chord from a to f
            lhs = (b.const - a.const) * (f.slope[0] - a.slope[0])
            rhs = (f.const - a.const) * (b.slope[0] - a.slope[0])
            if lhs <= rhs:
                hull.pop()
            else:
                break
        hull.append(f)
    return hull


def _dominated(target: AffineFunctional, others: Sequence[AffineFunctional]) -> bool:
    """Is ``target <= max(others)`` on all of R^n?

    Equivalent to the lifted point (slope, const) of ``target`` lying on or
    below the upper hull of the lifted ``others``: some convex weights w
    reproduce the slope with ``sum w_j const_j >= const``.
    """
    if not others:
        return False
    n = target.n
    m = len(others)
    A_eq = [[o.slope[k] for o in others] for k in range(n)] + [[Fraction(1)] * m]
    b_eq = list(target.slope) + [Fraction(1)]
    A_ub = [[-o.const for o in others]]
    b_ub = [-target.const]
    res = exact.linprog([Fraction(0)] * m, A_ub, b_ub, A_eq, b_eq, nonneg=True)
    return res.status == "optimal"


def _probe_directions(n: int) -> list:
    dirs = []
    for i in range(n):
        for j in range(i, n):
            for si in (1, -1):
                for sj in ((1, -1) if j > i else (0,)):
                    c = [0] * n
                    c[i] += si
                    c[j] += sj
                    dirs.append(c)
    return dirs


def _extreme_slope(target: AffineFunctional, others: Sequence[AffineFunctional]) -> bool:
    """Cheap sufficient test for non-redundancy.

    If ``c . slope`` is largest for target alone, target wins far out along c.
    Slopes are assumed distinct.
    """
    for c in _probe_directions(target.n):
        v = sum(a * b for a, b in zip(c, target.slope))
        if all(sum(a * b for a, b in zip(c, o.slope)) < v for o in others):
            return True
    return False


def canonicalize(f: PolyhedralFunction) -> PolyhedralFunction:
    """The unique minimal representation, sorted by (slope, const)."""
    best: dict = {}
    for lam in f.functionals:
        cur = best.get(lam.slope)
        if cur is None or lam.const > cur.const:
            best[lam.slope] = lam
    fs = sorted(best.values())
    if f.n == 1:
        return PolyhedralFunction(1, tuple(_upper_hull_1d(fs)))
    keep = list(fs)
    for lam in fs:
        others = [o for o in keep if o is not lam]
        if _extreme_slope(lam, others):
            continue
        if _dominated(lam, others):
            keep = others
    return PolyhedralFunction(f.n, tuple(keep))


def is_canonical(f: PolyhedralFunction) -> bool:
    return canonicalize(f).functionals == f.functionals


def integrality_class(f: PolyhedralFunction) -> IntegralityClass:
    """The most restrictive class containing every functional of ``f``."""
    classes = {classify_functional(lam) for lam in f.functionals}
    for c in (IntegralityClass.GENERAL, IntegralityClass.TRANSINTEGRAL):
        if c in classes:
            return c
    return IntegralityClass.INTEGRAL


def support_at(f: PolyhedralFunction, x: Sequence[Fraction]) -> AffineFunctional:
    """An active functional at x (a global minorant touching f at x)."""
    return min(f.functionals[i] for i in active_set(f, x))


@dataclass(frozen=True)
class LineParam:
    """``t -> base + t * direction``, optionally limited to ``[lo, hi]``.

    ``lo``/``hi`` of None mean the line is unbounded on that side.
    """

    base: Point
    direction: Point
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None

    def __post_init__(self):
        object.__setattr__(self, "base", point(self.base))
        object.__setattr__(self, "direction", point(self.direction))
        if len(self.base) != len(self.direction):
            raise DimensionError("line base and direction differ in dimension")
        if all(d == 0 for d in self.direction):
            raise ValueError("line direction must be nonzero")
        if self.lo is not None:
            object.__setattr__(self, "lo", rat(self.lo))
        if self.hi is not None:
            object.__setattr__(self, "hi", rat(self.hi))
        if self.lo is not None and self.hi is not None and self.lo > self.hi:
            raise ValueError("empty line interval")

    @property
    def n(self) -> int:
        return len(self.base)

    def at(self, t: Fraction) -> Point:
        return axpy(self.base, t, self.direction)

    def contains_param(self, t: Fraction) -> bool:
        return (self.lo is None or t >= self.lo) and (self.hi is None or t <= self.hi)

    def to_json(self) -> dict:
        return {
            "base": [format_rat(c) for c in self.base],
            "direction": [format_rat(c) for c in self.direction],
            "interval": [None if self.lo is None else format_rat(self.lo),
                         None if self.hi is None else format_rat(self.hi)],
        }


def restrict(f: PolyhedralFunction, line: LineParam) -> PolyhedralFunction:
    """The one-variable function ``t -> f(base + t * direction)``."""
    if line.n != f.n:
        raise DimensionError(f"line in R^{line.n} for a function on R^{f.n}")
    fs = tuple(
        AffineFunctional((lam.linear(line.direction),), lam(line.base)) for lam in f.functionals
    )
    return canonicalize(PolyhedralFunction(1, fs))


def dir_deriv(f: PolyhedralFunction, x: Sequence[Fraction], z: Sequence[Fraction]) -> Fraction:
    """``f'(x, z)``: the largest ``slope . z`` over functionals active at x."""
    _check_dim(f, x)
    _check_dim(f, z)
    if all(c == 0 for c in z):
        raise ValueError("direction must be nonzero")
    return max(f.functionals[i].linear(z) for i in active_set(f, x))


@dataclass(frozen=True)
class DomainOfAffinity:
    functional: AffineFunctional
    region: RationalPolyhedron


def _empty_polyhedron(n: int) -> RationalPolyhedron:
    e = tuple(Fraction(1 if k == 0 else 0) for k in range(n))
    return RationalPolyhedron.from_functionals(
        n, [AffineFunctional(e, Fraction(-1)), AffineFunctional(tuple(-c for c in e), Fraction(0))]
    )


def domain_of_affinity(f: PolyhedralFunction, i: int) -> DomainOfAffinity:
    """``{x : lambda_i(x) >= lambda_j(x) for all j}`` paired with ``lambda_i``."""
    if not 0 <= i < len(f.functionals):
        raise IndexError(f"functional index {i} out of range for {len(f.functionals)} functionals")
    lam = f.functionals[i]
    cons = []
    for j, other in enumerate(f.functionals):
        if j == i:
            continue
        diff = lam - other
        if all(a == 0 for a in diff.slope):
            if diff.const < 0:
                return DomainOfAffinity(lam, _empty_polyhedron(f.n))
            continue
        if diff not in cons:
            cons.append(diff)
    return DomainOfAffinity(lam, RationalPolyhedron.from_functionals(f.n, cons))


def domains_of_affinity(f: PolyhedralFunction) -> list[DomainOfAffinity]:
    return [domain_of_affinity(f, i) for i in range(len(f.functionals))]


class HullError(ValueError):
    """The interior-point hypothesis of :func:`certify_affine_on_hull` fails."""


def strictly_inside_hull(T: Sequence[Sequence[Fraction]], z: Sequence[Fraction]) -> bool:
    """Is z in the interior of conv(T)?  Raises HullError if conv(T) is flat.

    z is interior to a full-dimensional hull exactly when it is a convex
    combination of T with every weight strictly positive.
    """
    pts = [point(t) for t in T]
    if not pts:
        raise HullError("empty point set")
    n = len(pts[0])
    diffs = [list(sub(p, pts[0])) for p in pts[1:]]
    if not diffs or exact.rank(diffs) < n:
        raise HullError("convex hull is not full-dimensional; interiority cannot be verified")
    m = len(pts)
    # variables: w_1..w_m, s ; maximise s with w_i >= s
    A_eq = [[p[k] for p in pts] + [Fraction(0)] for k in range(n)] + [[Fraction(1)] * m + [Fraction(0)]]
    b_eq = list(point(z)) + [Fraction(1)]
    A_ub = []
    b_ub = []
    for i in range(m):
        row = [Fraction(0)] * (m + 1)
        row[i] = Fraction(-1)
        row[m] = Fraction(1)
        A_ub.append(row)
        b_ub.append(Fraction(0))
    cap = [Fraction(0)] * m + [Fraction(1)]
    A_ub.append(cap)
    b_ub.append(Fraction(1))
    res = exact.linprog(cap, A_ub, b_ub, A_eq, b_eq)
    return res.status == "optimal" and res.value > 0


def certify_affine_on_hull(
    f: Callable[[Point], Fraction],
    T: Sequence[Sequence[Fraction]],
    z: Sequence[Fraction],
    lam: AffineFunctional,
) -> bool:
    """Check ``f = lam`` on ``T ∪ {z}``; for convex f this gives ``f = lam`` on conv(T).

    ``f`` may be a PolyhedralFunction or any callable oracle.  Raises
    HullError when z is not verifiably interior to conv(T).
    """
    if not strictly_inside_hull(T, z):
        raise HullError(f"{[format_rat(c) for c in z]} is not interior to the hull")
    return all(f(point(x)) == lam(point(x)) for x in list(T) + [z])


class _MinusInfinity:
    """The value of an infimum that is unbounded below."""

    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self) -> str:
        return "MINUS_INFINITY"


MINUS_INFINITY = _MinusInfinity()


def _frame(f: PolyhedralFunction, x1, x2, z):
    if f.n != 2:
        raise DimensionError("the partial infimum transform is defined for functions on R^2")
    x1, x2, z = point(x1), point(x2), point(z)
    if x1 == x2:
        raise ValueError("x1 and x2 must differ")
    if all(c == 0 for c in z):
        raise ValueError("z must be nonzero")
    d = sub(x2, x1)
    # lambda_i(x1 + t d + u z) = c_i + e_i t + s_i u
    return [(lam(x1), lam.linear(d), lam.linear(z)) for lam in f.functionals]


def partial_conjugate(f: PolyhedralFunction, x1, x2, z, m):
    """``g_m(t) = inf_u f(x1 + t(x2 - x1) + u z) - m u`` as a 1-D function of t.

    With ``s_i = slope_i . z`` the infimum is finite exactly when
    ``min s_i <= m <= max s_i``.  It then equals the largest convex
    combination of the t-dependent constants over weights that reproduce m,
    whose extreme points use one functional with ``s_i = m`` or two that
    bracket m.  Returns MINUS_INFINITY otherwise.
    """
    m = rat(m)
    terms = _frame(f, x1, x2, z)
    slopes = [s for _, _, s in terms]
    if m < min(slopes) or m > max(slopes):
        return MINUS_INFINITY
    pieces = []
    for c, e, s in terms:
        if s == m:
            pieces.append(AffineFunctional((e,), c))
    for (ci, ei, si), (cj, ej, sj) in itertools.permutations(terms, 2):
        if si < m < sj:
            wi = (sj - m) / (sj - si)
            wj = (m - si) / (sj - si)
            pieces.append(AffineFunctional((wi * ei + wj * ej,), wi * ci + wj * cj))
    return canonicalize(PolyhedralFunction(1, tuple(pieces)))


@dataclass(frozen=True)
class PartialConjugateResult:
    slope_set: tuple
    profiles: dict = field(default_factory=dict)
    finite: dict = field(default_factory=dict)


def slope_decomposition(f: PolyhedralFunction, x1, x2, z, slope_set=None) -> PartialConjugateResult:
    """``g_m`` for every m in the slope set (default: the values ``slope . z``
    over the canonical functionals of f)."""
    z = point(z)
    if slope_set is None:
        slope_set = sorted({lam.linear(z) for lam in canonicalize(f).functionals})
    else:
        slope_set = sorted({rat(m) for m in slope_set})
    profiles, finite = {}, {}
    for m in slope_set:
        g = partial_conjugate(f, x1, x2, z, m)
        finite[m] = g is not MINUS_INFINITY
        profiles[m] = g
    return PartialConjugateResult(tuple(slope_set), profiles, finite)


@dataclass(frozen=True)
class DecompositionCheck:
    ok: bool
    failure: Optional[dict] = None

    def __bool__(self) -> bool:
        return self.ok


def verify_slope_decomposition(f: PolyhedralFunction, x1, x2, z, samples, slope_set=None) -> DecompositionCheck:
    """Check ``f(x1 + t(x2-x1) + u z) = max_m g_m(t) + m u`` at every sample (t, u)."""
    x1, x2, z = point(x1), point(x2), point(z)
    dec = slope_decomposition(f, x1, x2, z, slope_set)
    if not dec.slope_set:
        return DecompositionCheck(False, {"reason": "empty slope set"})
    for m in dec.slope_set:
        if not dec.finite[m]:
            return DecompositionCheck(False, {"reason": "minus infinity", "m": format_rat(m)})
    d = sub(x2, x1)
    for t, u in samples:
        t, u = rat(t), rat(u)
        x = tuple(a + t * b + u * c for a, b, c in zip(x1, d, z))
        lhs = eval(f, x)
        rhs = max(eval(dec.profiles[m], (t,)) + m * u for m in dec.slope_set)
        if lhs != rhs:
            return DecompositionCheck(False, {
                "reason": "mismatch", "t": format_rat(t), "u": format_rat(u),
                "f": format_rat(lhs), "sup": format_rat(rhs),
            })
    return DecompositionCheck(True)


def breakpoints(g: PolyhedralFunction) -> list[Fraction]:
    """Kinks of a canonical one-variable function, increasing."""
    if g.n != 1:
        raise DimensionError("breakpoints are defined for one-variable functions")
    fs = sorted(canonicalize(g).functionals)
    return [(a.const - b.const) / (b.slope[0] - a.slope[0]) for a, b in zip(fs, fs[1:])]


def pieces_on_interval(g: PolyhedralFunction, lo: Fraction, hi: Fraction) -> list[tuple]:
    """``[(start, end, functional), ...]`` covering ``[lo, hi]`` left to right.

    Only pieces with positive length inside the interval are listed, so the
    result is the minimal description of g on ``[lo, hi]`` (a single piece
    when ``lo == hi``).
    """
    lo, hi = rat(lo), rat(hi)
    fs = sorted(canonicalize(g).functionals)
    bps = [(a.const - b.const) / (b.slope[0] - a.slope[0]) for a, b in zip(fs, fs[1:])]
    edges = [None] + bps + [None]
    out = []
    for k, lam in enumerate(fs):
        s = lo if edges[k] is None else max(lo, edges[k])
        e = hi if edges[k + 1] is None else min(hi, edges[k + 1])
        if s < e or (lo == hi and s == e):
            out.append((s, e, lam))
    return out
