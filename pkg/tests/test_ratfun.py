import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polymax.ratfun import (
    AffineFunctional,
    DimensionError,
    IntegralityClass,
    classify_functional,
    eval_functional,
    format_point,
    format_rat,
    functional_from_json,
    functional_to_json,
    group_membership,
    lcm_all,
    parse_point,
    parse_rat,
    primitive_direction,
    rat,
)

from _gen import rand_rat

rats = st.builds(F, st.integers(-600, 600), st.integers(1, 12))


def test_eval_examples():
    assert eval_functional(AffineFunctional.of((2, -1), 3), (F(1), F(1))) == 4
    assert eval_functional(AffineFunctional.of((0, 0, 0), F(7, 2)), (F(9), F(-4), F(1, 3))) == F(7, 2)
    assert eval_functional(AffineFunctional.of((1, 1), 0), (F(1, 3), F(2, 3))) == 1


def test_eval_dimension_mismatch():
    with pytest.raises(DimensionError):
        eval_functional(AffineFunctional.of((1, 1), 0), (F(1),))


def test_classify_examples():
    assert classify_functional(AffineFunctional.of((2, -1), 3)) is IntegralityClass.INTEGRAL
    assert classify_functional(AffineFunctional.of((2, -1), F(1, 2))) is IntegralityClass.TRANSINTEGRAL
    assert classify_functional(AffineFunctional.of((F(1, 2), 0), 0)) is IntegralityClass.GENERAL


def test_class_inclusions():
    I, T, G = IntegralityClass.INTEGRAL, IntegralityClass.TRANSINTEGRAL, IntegralityClass.GENERAL
    assert G.admits(T) and G.admits(I) and T.admits(I)
    assert not I.admits(T) and not T.admits(G)


def test_membership_examples():
    assert group_membership(F(5, 3), (F(2, 3),))
    assert not group_membership(F(1, 2), (F(2, 3),))
    assert group_membership(F(7, 6), (F(1, 2), F(1, 3)))


def _brute_membership(v, xs):
    # den_i * x_i is an integer, so residues of c_i mod den_i exhaust every case;
    # c0 is then forced to be v - sum(c_i x_i)
    for cs in itertools.product(*(range(x.denominator) for x in xs)):
        rest = v - sum(c * x for c, x in zip(cs, xs))
        if rest.denominator == 1:
            return True
    return False


def test_membership_matches_brute_force():
    rng = random.Random(11)
    for _ in range(500):
        n = rng.randint(1, 2)
        xs = tuple(rand_rat(rng, -2, 2, 12) for _ in range(n))
        v = rand_rat(rng, -2, 2, 12)
        assert group_membership(v, xs) == _brute_membership(v, xs), (v, xs)


def test_clearing_denominators_gives_transintegral():
    rng = random.Random(5)
    for _ in range(100):
        lam = AffineFunctional(tuple(rand_rat(rng, -3, 3, 7) for _ in range(3)), rand_rat(rng, -3, 3, 7))
        L = lcm_all(a.denominator for a in lam.slope)
        scaled = AffineFunctional(tuple(a * L for a in lam.slope), lam.const)
        assert IntegralityClass.TRANSINTEGRAL.admits(classify_functional(scaled))


@settings(max_examples=200, deadline=None)
@given(
    slope=st.lists(rats, min_size=2, max_size=2),
    const=rats,
    x=st.lists(rats, min_size=2, max_size=2),
    y=st.lists(rats, min_size=2, max_size=2),
    t=st.builds(F, st.integers(0, 16), st.just(16)),
)
def test_eval_is_affine(slope, const, x, y, t):
    lam = AffineFunctional(tuple(slope), const)
    mid = tuple(t * a + (1 - t) * b for a, b in zip(x, y))
    assert lam(mid) == t * lam(tuple(x)) + (1 - t) * lam(tuple(y))


def test_rat_parsing_and_format():
    assert parse_rat("6/4") == F(3, 2)
    assert format_rat(F(-6, 4)) == "-3/2"
    assert format_rat(F(4, 2)) == "2"
    assert parse_point("1/2,-3,0") == (F(1, 2), F(-3), F(0))
    assert format_point((F(1, 2), F(-3))) == "1/2,-3"
    for bad in ("", "1/0", "x", "1.5"):
        with pytest.raises(ValueError):
            parse_rat(bad)


def test_floats_refused():
    with pytest.raises(TypeError):
        rat(0.5)
    with pytest.raises(TypeError):
        rat(True)


def test_json_round_trip():
    lam = AffineFunctional.of((F(1, 2), -3), F(-7, 9))
    assert functional_from_json(functional_to_json(lam)) == lam
    with pytest.raises(ValueError, match="const"):
        functional_from_json({"slope": ["1"], "const": 0.5})
    with pytest.raises(DimensionError):
        functional_from_json({"slope": ["1"], "const": "0"}, n=2)


def test_primitive_direction():
    p, c = primitive_direction((F(1, 2), F(-3, 4)))
    assert p == (F(2), F(-3)) and c == 4
    with pytest.raises(ValueError):
        primitive_direction((F(0), F(0)))


def test_functional_str():
    assert str(AffineFunctional.of((1, 1), -5)) == "x + y - 5"
    assert str(AffineFunctional.of((0, 0), 0)) == "0"
