"""Rational polyhedra given by halfspaces ``lambda(x) >= 0``.

Membership, faces (called facets here, in the broad sense: any nonempty set
cut out by making some constraints tight), vertices, relative interiors and
affine orthants.  Everything is exact; the combinatorial routines are meant
for small dimensions (n <= 3) and a handful of constraints.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from . import exact
from .ratfun import (
    AffineFunctional,
    DimensionError,
    Point,
    functional_from_json,
    functional_to_json,
    point,
)

FACET_BUDGET = 12
MAX_COMBINATORIAL_DIM = 3


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class HalfSpace:
    functional: AffineFunctional

    def __post_init__(self):
        if all(a == 0 for a in self.functional.slope):
            raise ValueError("a halfspace needs a nonzero slope")

    def contains(self, x: Sequence[Fraction]) -> bool:
        return self.functional(x) >= 0


@dataclass(frozen=True)
class RationalPolyhedron:
    n: int
    halfspaces: tuple = ()

    def __post_init__(self):
        hs = tuple(h if isinstance(h, HalfSpace) else HalfSpace(h) for h in self.halfspaces)
        for h in hs:
            if h.functional.n != self.n:
                raise DimensionError(f"halfspace of dimension {h.functional.n} in R^{self.n}")
        object.__setattr__(self, "halfspaces", hs)

    @classmethod
    def from_functionals(cls, n: int, functionals: Iterable[AffineFunctional]) -> RationalPolyhedron:
        return cls(n, tuple(HalfSpace(f) for f in functionals))

    @classmethod
    def whole_space(cls, n: int) -> RationalPolyhedron:
        return cls(n, ())

    @classmethod
    def box(cls, lows: Sequence, highs: Sequence) -> RationalPolyhedron:
        """The product of intervals ``[lows[i], highs[i]]``."""
        lows, highs = point(lows), point(highs)
        n = len(lows)
        fs = []
        for i in range(n):
            e = [Fraction(0)] * n
            e[i] = Fraction(1)
            fs.append(AffineFunctional(tuple(e), -lows[i]))
            fs.append(AffineFunctional(tuple(-v for v in e), highs[i]))
        return cls.from_functionals(n, fs)

    @property
    def functionals(self) -> list[AffineFunctional]:
        return [h.functional for h in self.halfspaces]

    def intersect(self, other: RationalPolyhedron) -> RationalPolyhedron:
        if other.n != self.n:
            raise DimensionError(f"cannot intersect R^{self.n} with R^{other.n}")
        return RationalPolyhedron(self.n, self.halfspaces + other.halfspaces)

    def with_equalities(self, indices: Iterable[int]) -> RationalPolyhedron:
        extra = tuple(HalfSpace(-self.halfspaces[i].functional) for i in sorted(indices))
        return RationalPolyhedron(self.n, self.halfspaces + extra)

    def contains(self, x: Sequence[Fraction]) -> bool:
        return contains(self, x)

    def to_json(self) -> dict:
        return {"n": self.n, "halfspaces": [functional_to_json(f) for f in self.functionals]}

    @classmethod
    def from_json(cls, obj: dict) -> RationalPolyhedron:
        try:
            n = obj["n"]
            hs = obj["halfspaces"]
        except (KeyError, TypeError):
            raise ValueError("polyhedron JSON needs 'n' and 'halfspaces'") from None
        if not isinstance(n, int) or n < 1:
            raise ValueError(f"n: expected a positive integer, got {n!r}")
        return cls.from_functionals(n, [functional_from_json(h, n) for h in hs])


@dataclass(frozen=True)
class Facet:
    active: frozenset
    region: RationalPolyhedron


def contains(P: RationalPolyhedron, x: Sequence[Fraction]) -> bool:
    if len(x) != P.n:
        raise DimensionError(f"point of dimension {len(x)} tested against R^{P.n}")
    return all(h.functional(x) >= 0 for h in P.halfspaces)


def _rows(P: RationalPolyhedron, indices: Iterable[int]):
    """``A x <= b`` rows encoding ``lambda_i(x) >= 0``."""
    A, b = [], []
    for i in indices:
        f = P.halfspaces[i].functional
        A.append([-a for a in f.slope])
        b.append(f.const)
    return A, b


def _eq_rows(P: RationalPolyhedron, indices: Iterable[int]):
    A, b = [], []
    for i in indices:
        f = P.halfspaces[i].functional
        A.append(list(f.slope))
        b.append(-f.const)
    return A, b


def feasible_point(P: RationalPolyhedron, equalities: Iterable[int] = ()) -> Optional[Point]:
    """Some point of P (with the given constraints tight), or None if empty."""
    eq = sorted(set(equalities))
    A, b = _rows(P, [i for i in range(len(P.halfspaces)) if i not in eq])
    Ae, be = _eq_rows(P, eq)
    return exact.feasible_point(A, b, P.n, Ae, be)


def is_empty(P: RationalPolyhedron) -> bool:
    return feasible_point(P) is None


def implicit_equalities(P: RationalPolyhedron, forced: Iterable[int] = ()) -> Optional[frozenset]:
    """Indices of constraints that vanish identically on ``P ∩ {forced tight}``.

    Returns None when that set is empty.
    """
    return _implicit_equalities(P, frozenset(forced))


@functools.lru_cache(maxsize=4096)
def _implicit_equalities(P: RationalPolyhedron, forced: frozenset) -> Optional[frozenset]:
    m = len(P.halfspaces)
    eq = set(forced)
    if feasible_point(P, eq) is None:
        return None
    point_, s = _max_uniform_slack(P, eq)
    if s > 0:
        return frozenset(eq)
    for k in range(m):
        if k in eq:
            continue
        f = P.halfspaces[k].functional
        A, b = _rows(P, [i for i in range(m) if i not in eq])
        Ae, be = _eq_rows(P, sorted(eq))
        res = exact.linprog(list(f.slope), A, b, Ae, be)
        if res.status == "optimal" and res.value + f.const == 0:
            eq.add(k)
    return frozenset(eq)


def _max_uniform_slack(P: RationalPolyhedron, eq: set) -> tuple[Optional[Point], Fraction]:
    """Maximise s (capped at 1) with every non-forced constraint >= s."""
    n = P.n
    free = [i for i in range(len(P.halfspaces)) if i not in eq]
    if not free:
        return feasible_point(P, eq), Fraction(1)
    A, b = [], []
    for i in free:
        f = P.halfspaces[i].functional
        A.append([-a for a in f.slope] + [Fraction(1)])
        b.append(f.const)
    A.append([Fraction(0)] * n + [Fraction(1)])
    b.append(Fraction(1))
    Ae, be = [], []
    for i in sorted(eq):
        f = P.halfspaces[i].functional
        Ae.append(list(f.slope) + [Fraction(0)])
        be.append(-f.const)
    res = exact.linprog([Fraction(0)] * n + [Fraction(1)], A, b, Ae, be)
    if res.status != "optimal":
        return None, Fraction(-1)
    return res.x[:n], res.value


def relative_interior_point(P: RationalPolyhedron) -> Optional[Point]:
    """A point in the relative interior of P, or None if P is empty."""
    eq = implicit_equalities(P)
    if eq is None:
        return None
    x, s = _max_uniform_slack(P, set(eq))
    return tuple(x)


def affine_hull_equations(P: RationalPolyhedron) -> Optional[list[AffineFunctional]]:
    eq = implicit_equalities(P)
    if eq is None:
        return None
    return [P.halfspaces[i].functional for i in sorted(eq)]


def dimension(P: RationalPolyhedron) -> int:
    """Dimension of the affine hull; -1 for the empty set."""
    eqs = affine_hull_equations(P)
    if eqs is None:
        return -1
    return P.n - exact.rank([list(f.slope) for f in eqs])


def is_bounded(P: RationalPolyhedron) -> bool:
    if is_empty(P):
        return True
    A, b = _rows(P, range(len(P.halfspaces)))
    for i in range(P.n):
        for sign in (1, -1):
            c = [Fraction(0)] * P.n
            c[i] = Fraction(sign)
            if exact.linprog(c, A, b).status == "unbounded":
                return False
    return True


def recession_directions_ok(P: RationalPolyhedron, d: Sequence[Fraction]) -> bool:
    """True when ``d`` is a recession direction of P (ignoring emptiness)."""
    return all(f.linear(d) >= 0 for f in P.functionals)


def line_interval(P: RationalPolyhedron, base: Sequence[Fraction], d: Sequence[Fraction]):
    """``{t : base + t d in P}`` as ``(lo, hi)`` with None for infinite ends.

    Returns None if the line misses P.
    """
    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    for f in P.functionals:
        c0 = f(base)
        c1 = f.linear(d)
        if c1 == 0:
            if c0 < 0:
                return None
        elif c1 > 0:
            t = -c0 / c1
            lo = t if lo is None else max(lo, t)
        else:
            t = -c0 / c1
            hi = t if hi is None else min(hi, t)
    if lo is not None and hi is not None and lo > hi:
        return None
    return lo, hi


def facets(P: RationalPolyhedron, budget: int = FACET_BUDGET) -> list[Facet]:
    """All nonempty facets of P, the improper facet P itself included.

    A facet is identified by the set of constraints that vanish identically
    on it, so facets cut out by different index sets but equal as point
    sets appear once.  Ordered by (size of that set, the set).
    """
    m = len(P.halfspaces)
    if m > budget:
        raise BudgetExceeded(f"{m} halfspaces exceeds the facet enumeration budget of {budget}")
    root = implicit_equalities(P)
    if root is None:
        return []
    seen = {root}
    frontier = [root]
    while frontier:
        nxt = []
        for E in frontier:
            for k in range(m):
                if k in E:
                    continue
                closure = implicit_equalities(P, E | {k})
                if closure is not None and closure not in seen:
                    seen.add(closure)
                    nxt.append(closure)
        frontier = nxt
    ordered = sorted(seen, key=lambda E: (len(E), sorted(E)))
    return [Facet(E, P.with_equalities(E)) for E in ordered]


def proper_facets(P: RationalPolyhedron) -> list[Facet]:
    fs = facets(P)
    return fs[1:]


def vertices(P: RationalPolyhedron) -> list[Point]:
    """Exact vertex list (sorted) for n <= 3."""
    n = P.n
    if n > MAX_COMBINATORIAL_DIM:
        raise DimensionError(f"vertex enumeration is limited to n <= {MAX_COMBINATORIAL_DIM}")
    found = set()
    fs = P.functionals
    for combo in itertools.combinations(range(len(fs)), n):
        A = [list(fs[i].slope) for i in combo]
        b = [-fs[i].const for i in combo]
        x = exact.solve_square(A, b)
        if x is None:
            continue
        x = tuple(x)
        if contains(P, x):
            found.add(x)
    return sorted(found)


def is_affine_orthant(P: RationalPolyhedron) -> bool:
    if len(P.halfspaces) != P.n:
        return False
    return exact.rank([list(f.slope) for f in P.functionals]) == P.n


def interior_contains(P: RationalPolyhedron, x: Sequence[Fraction]) -> bool:
    """Membership in the relative interior of P."""
    if P.n > MAX_COMBINATORIAL_DIM:
        raise DimensionError(f"relative interiors are limited to n <= {MAX_COMBINATORIAL_DIM}")
    if not contains(P, x):
        return False
    eq = implicit_equalities(P)
    return all(f(x) > 0 for i, f in enumerate(P.functionals) if i not in eq)


def containing_orthant(P: RationalPolyhedron) -> Optional[tuple]:
    """Indices of n constraints of P with independent slopes, if any.

    The affine orthant they define contains P.  The lexicographically first
    such choice is returned.
    """
    fs = P.functionals
    for combo in itertools.combinations(range(len(fs)), P.n):
        if exact.rank([list(fs[i].slope) for i in combo]) == P.n:
            return combo
    return None


def segment_polyhedron(a: Sequence[Fraction], b: Sequence[Fraction]) -> RationalPolyhedron:
    """The closed segment ``[a, b]`` as a polyhedron (a != b)."""
    a, b = point(a), point(b)
    n = len(a)
    d = [bi - ai for ai, bi in zip(a, b)]
    if all(v == 0 for v in d):
        raise ValueError("degenerate segment")
    fs = []
    # pin the complement of the direction with equality pairs
    for normal in exact.nullspace([d], n):
        lam = AffineFunctional(tuple(normal), -sum(c * ai for c, ai in zip(normal, a)))
        fs += [lam, -lam]
    da = sum(c * ai for c, ai in zip(d, a))
    db = sum(c * bi for c, bi in zip(d, b))
    fs.append(AffineFunctional(tuple(d), -da))
    fs.append(AffineFunctional(tuple(-v for v in d), db))
    return RationalPolyhedron.from_functionals(n, fs)
