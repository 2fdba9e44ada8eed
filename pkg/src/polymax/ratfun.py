"""Exact rational scalars, points and affine functionals.

Rationals are :class:`fractions.Fraction` values, which are always kept in
lowest terms with a positive denominator.  Points are tuples of fractions.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Sequence, Union

Rat = Fraction
Point = tuple  # tuple[Fraction, ...]

RatLike = Union[Fraction, int, str]


class DimensionError(ValueError):
    """Raised when objects of different ambient dimension are combined."""


def rat(value: RatLike) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are refused: they would silently smuggle rounding error in.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rat(value)
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


def parse_rat(text: str) -> Fraction:
    s = text.strip()
    if not s:
        raise ValueError("empty rational")
    num, sep, den = s.partition("/")
    try:
        p = int(num)
        q = int(den) if sep else 1
    except ValueError:
        raise ValueError(f"malformed rational {text!r}") from None
    if q == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(p, q)


def format_rat(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def point(coords: Iterable[RatLike]) -> Point:
    p = tuple(rat(c) for c in coords)
    if not p:
        raise DimensionError("points must have dimension >= 1")
    return p


def parse_point(text: str) -> Point:
    """Parse a comma-separated vector such as ``"1/2,-3,0"``."""
    return point(parse_rat(c) for c in text.split(","))


def format_point(p: Sequence[Fraction]) -> str:
    return ",".join(format_rat(c) for c in p)


def basis_vector(n: int, i: int) -> Point:
    return tuple(Fraction(1 if j == i else 0) for j in range(n))


def dot(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return sum((x * y for x, y in zip(a, b)), Fraction(0))


def add(a: Sequence[Fraction], b: Sequence[Fraction]) -> Point:
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Sequence[Fraction], b: Sequence[Fraction]) -> Point:
    if len(a) != len(b):
        raise DimensionError(f"dimension mismatch: {len(a)} vs {len(b)}")
    return tuple(x - y for x, y in zip(a, b))


def scale(c: Fraction, a: Sequence[Fraction]) -> Point:
    return tuple(c * x for x in a)


def axpy(x: Sequence[Fraction], t: Fraction, d: Sequence[Fraction]) -> Point:
    """Return ``x + t*d``."""
    if len(x) != len(d):
        raise DimensionError(f"dimension mismatch: {len(x)} vs {len(d)}")
    return tuple(a + t * b for a, b in zip(x, d))


def lcm_all(values: Iterable[int]) -> int:
    return reduce(math.lcm, values, 1)


def primitive_direction(d: Sequence[Fraction]) -> tuple[Point, Fraction]:
    """Scale ``d`` to the primitive integer vector on the same ray.

    Returns ``(p, c)`` with ``p = c * d``, ``c > 0`` and ``p`` an integer
    vector whose entries have gcd 1.
    """
    if all(x == 0 for x in d):
        raise ValueError("zero direction")
    L = lcm_all(x.denominator for x in d)
    ints = [int(x * L) for x in d]
    g = reduce(math.gcd, (abs(v) for v in ints))
    c = Fraction(L, g)
    return tuple(Fraction(v // g) for v in ints), c


class IntegralityClass(enum.Enum):
    INTEGRAL = "Integral"
    TRANSINTEGRAL = "TransIntegral"
    GENERAL = "General"

    def admits(self, other: IntegralityClass) -> bool:
        """True when every functional of class ``other`` is also in ``self``."""
        order = [IntegralityClass.INTEGRAL, IntegralityClass.TRANSINTEGRAL, IntegralityClass.GENERAL]
        return order.index(other) <= order.index(self)


@dataclass(frozen=True, order=True)
class AffineFunctional:
    """``x -> slope . x + const``.

    Ordering is lexicographic on ``(slope, const)``, which is the tie-break
    used throughout the package.
    """

    slope: Point
    const: Fraction

    def __post_init__(self):
        object.__setattr__(self, "slope", point(self.slope))
        object.__setattr__(self, "const", rat(self.const))

    @classmethod
    def of(cls, slope: Iterable[RatLike], const: RatLike = 0) -> AffineFunctional:
        return cls(tuple(rat(s) for s in slope), rat(const))

    @property
    def n(self) -> int:
        return len(self.slope)

    def __call__(self, x: Sequence[Fraction]) -> Fraction:
        return eval_functional(self, x)

    def linear(self, z: Sequence[Fraction]) -> Fraction:
        """The slope applied to a vector (no constant term)."""
        return dot(self.slope, z)

    def __add__(self, other: AffineFunctional) -> AffineFunctional:
        return AffineFunctional(add(self.slope, other.slope), self.const + other.const)

    def __sub__(self, other: AffineFunctional) -> AffineFunctional:
        return AffineFunctional(sub(self.slope, other.slope), self.const - other.const)

    def __neg__(self) -> AffineFunctional:
        return AffineFunctional(tuple(-s for s in self.slope), -self.const)

    def scaled(self, c: Fraction) -> AffineFunctional:
        return AffineFunctional(scale(c, self.slope), c * self.const)

    def __str__(self) -> str:
        names = ["x", "y", "z"] if self.n <= 3 else [f"x{i + 1}" for i in range(self.n)]
        terms = []
        for a, v in zip(self.slope, names):
            if a == 0:
                continue
            coef = "" if a == 1 else "-" if a == -1 else format_rat(a) + "*"
            terms.append(f"{coef}{v}")
        if self.const != 0 or not terms:
            terms.append(format_rat(self.const))
        return " + ".join(terms).replace("+ -", "- ")


def eval_functional(lam: AffineFunctional, x: Sequence[Fraction]) -> Fraction:
    if len(x) != lam.n:
        raise DimensionError(f"functional has dimension {lam.n}, point has {len(x)}")
    return dot(lam.slope, x) + lam.const


def classify_functional(lam: AffineFunctional) -> IntegralityClass:
    if any(a.denominator != 1 for a in lam.slope):
        return IntegralityClass.GENERAL
    if lam.const.denominator != 1:
        return IntegralityClass.TRANSINTEGRAL
    return IntegralityClass.INTEGRAL


def group_membership(v: RatLike, x: Sequence[RatLike]) -> bool:
    """Decide whether ``v`` lies in ``Z + Z*x_1 + ... + Z*x_n``.

    The subgroup of Q generated by 1 and the coordinates is ``(g/L) Z`` where
    ``L`` is the lcm of the coordinate denominators and
    ``g = gcd(L, L*x_1, ..., L*x_n)``.
    """
    return membership_details(v, x)["member"]


def membership_details(v: RatLike, x: Sequence[RatLike]) -> dict:
    """The full computation behind :func:`group_membership`, for witnesses."""
    v = rat(v)
    xs = [rat(c) for c in x]
    L = lcm_all(c.denominator for c in xs)
    g = reduce(math.gcd, (int(c * L) for c in xs), L)
    scaled = v * L / g
    return {
        "value": format_rat(v),
        "point": [format_rat(c) for c in xs],
        "lcm_denominator": L,
        "gcd": g,
        "generator": format_rat(Fraction(g, L)),
        "scaled_value": format_rat(scaled),
        "member": scaled.denominator == 1,
    }


def functional_to_json(lam: AffineFunctional) -> dict:
    return {"slope": [format_rat(a) for a in lam.slope], "const": format_rat(lam.const)}


def functional_from_json(obj: dict, n: int | None = None) -> AffineFunctional:
    try:
        slope = obj["slope"]
        const = obj["const"]
    except (KeyError, TypeError):
        raise ValueError("functional must have 'slope' and 'const' fields") from None
    lam = AffineFunctional(tuple(_json_rat(s, "slope") for s in slope), _json_rat(const, "const"))
    if n is not None and lam.n != n:
        raise DimensionError(f"functional slope has length {lam.n}, expected {n}")
    return lam


def _json_rat(value, field: str) -> Fraction:
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return parse_rat(value)
        except ValueError as exc:
            raise ValueError(f"{field}: {exc}") from None
    raise ValueError(f"{field}: expected a rational string, got {value!r}")
