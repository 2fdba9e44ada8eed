import itertools
import random
import threading
from fractions import Fraction as F

import pytest

from polymax.oracle import (
    BUILTIN_NAMES,
    Box,
    DomainError,
    FunctionOracle,
    QueryLog,
    UnknownOracle,
    axis_convexity_check,
    builtin_oracle,
    from_polyfun,
    jensen_check,
    lipschitz_estimate,
    witness_violates,
)
from polymax.polyfun import PolyhedralFunction
from polymax.polyhedron import RationalPolyhedron
from polymax.ratfun import DimensionError

from _gen import rand_polyfun, rand_rat

P = PolyhedralFunction.of
TS = [F(1, 4), F(1, 2), F(3, 4)]
TRIANGLE = RationalPolyhedron.box((0, 0), (1, 1)).intersect(
    RationalPolyhedron.from_functionals(2, [P(((-1, -1), 1)).functionals[0]]))


def test_from_polyfun_examples():
    o = from_polyfun(P(((1,), 0), ((0,), 0)), RationalPolyhedron.box((-1,), (1,)))
    assert o((F(1, 2),)) == F(1, 2)
    with pytest.raises(DomainError):
        o((F(2),))
    c = from_polyfun(PolyhedralFunction.constant(1, 0))
    assert {c((F(k),)) for k in range(-5, 6)} == {0}
    t = from_polyfun(P(((1, 1), 0), ((0, 0), 0)), TRIANGLE)
    assert t((F(1, 4), F(1, 4))) == F(1, 2)
    with pytest.raises(DimensionError):
        from_polyfun(P(((1,), 0)), TRIANGLE)


def test_builtin_examples():
    assert builtin_oracle("square")((F(3, 2),)) == F(9, 4)
    assert builtin_oracle("halfslope")((F(2),)) == 1
    assert builtin_oracle("abs")((F(-3),)) == 3
    assert builtin_oracle("trop-conic")((F(1), F(-1))) == 2
    for name in ("square", "halfslope", "abs", "sawtooth-nonconvex", "trop-conic"):
        assert name in BUILTIN_NAMES
    with pytest.raises(UnknownOracle):
        builtin_oracle("nope")


def test_cache_counts_distinct_points():
    o = builtin_oracle("square")
    xs = [(F(k, 3),) for k in (1, 2, 1, 1, 5, 2)]
    for x in xs:
        o(x)
    assert o.calls == 6
    assert o.evaluations == 3


def test_uncached_oracle_counts_every_call():
    o = FunctionOracle(1, lambda x: x[0], cache=False)
    for _ in range(4):
        o((F(1),))
    assert o.evaluations == 4


def test_concurrent_queries_are_consistent():
    o = builtin_oracle("square")
    xs = [(F(k, 7),) for k in range(50)]
    results = []

    def work():
        results.append([o(x) for x in xs])

    threads = [threading.Thread(target=work) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(r == results[0] for r in results)
    assert o.evaluations == 50 and o.calls == 400


def test_query_log_records_points():
    log = QueryLog(builtin_oracle("abs"))
    log((F(-1),))
    log((F(2),))
    log((F(-1),))
    assert log.sorted_items() == [((F(-1),), 1), ((F(2),), 2)]


# -- Jensen checks


def test_jensen_passes_on_polyhedral_oracles():
    rng = random.Random(67)
    for _ in range(200):
        n = rng.randint(1, 2)
        o = from_polyfun(rand_polyfun(rng, n, integer_slopes=False))
        pairs = [(tuple(rand_rat(rng, -4, 4, 6) for _ in range(n)), tuple(rand_rat(rng, -4, 4, 6) for _ in range(n)))
                 for _ in range(10)]
        assert jensen_check(o, pairs, TS).passed


def test_jensen_examples():
    rng = random.Random(71)
    o = from_polyfun(P(((1,), 0), ((0,), 0)))
    pairs = [((rand_rat(rng, -3, 3, 8),), (rand_rat(rng, -3, 3, 8),)) for _ in range(50)]
    assert jensen_check(o, pairs, TS).passed
    saw = builtin_oracle("sawtooth-nonconvex")
    rep = jensen_check(saw, [((F(0),), (F(2),))], TS)
    assert not rep.passed and witness_violates(saw, rep.witness)
    assert jensen_check(saw, [((F(0),), (F(2),))], [F(0)]).passed
    with pytest.raises(ValueError):
        jensen_check(o, pairs, [F(2)])


def _brute_jensen_witness(o, lo, hi, den):
    """First violating (x, y, t) on a grid with denominators up to den."""
    xs = [F(k, den) for k in range(lo * den, hi * den + 1)]
    ts = sorted({F(a, b) for b in range(1, den + 1) for a in range(b + 1)})
    for x, y in itertools.combinations(xs, 2):
        for t in ts:
            if t * o((x,)) + (1 - t) * o((y,)) < o((t * x + (1 - t) * y,)):
                return x, y, t
    return None


def test_sawtooth_violation_found_by_brute_force():
    saw = builtin_oracle("sawtooth-nonconvex")
    x, y, t = _brute_jensen_witness(saw, -1, 3, 8)
    rep = jensen_check(saw, [((x,), (y,))], [t])
    assert not rep.passed and witness_violates(saw, rep.witness)


def test_every_failure_witness_reverifies():
    rng = random.Random(73)
    saw = builtin_oracle("sawtooth-nonconvex")
    failures = 0
    for _ in range(100):
        pairs = [((rand_rat(rng, -2, 3, 6),), (rand_rat(rng, -2, 3, 6),)) for _ in range(5)]
        rep = jensen_check(saw, pairs, TS)
        if not rep.passed:
            failures += 1
            fresh = builtin_oracle("sawtooth-nonconvex")
            assert witness_violates(fresh, rep.witness)
    assert failures > 0


def test_axis_convexity_check():
    box = Box.cube(2, -1, 1)
    assert axis_convexity_check(from_polyfun(P(((1, 1), 0), ((0, 0), 0))), box, F(1, 4)).passed
    rep = axis_convexity_check(builtin_oracle("min2d"), box, F(1, 4))
    assert not rep.passed and "axis" in rep.witness
    assert witness_violates(builtin_oracle("min2d"), rep.witness)
    point_box = Box((F(1, 2),), (F(1, 2),))
    assert axis_convexity_check(builtin_oracle("square"), point_box, F(1, 8)).passed


def _brute_lipschitz(o, box, res):
    best = F(0)
    grid = box.grid(res)
    for p, q in itertools.combinations(grid, 2):
        diff = [i for i in range(box.n) if p[i] != q[i]]
        if len(diff) == 1 and abs(p[diff[0]] - q[diff[0]]) == res:
            best = max(best, abs(o(p) - o(q)) / res)
    return best


def test_lipschitz_examples():
    box = Box.cube(2, -1, 1)
    o = from_polyfun(P(((2, 0), 0), ((0, -1), 0)))
    assert lipschitz_estimate(o, box, F(1, 2)) == 2 == _brute_lipschitz(o, box, F(1, 2))
    assert len(box.grid(F(1, 2))) == 25
    assert lipschitz_estimate(from_polyfun(PolyhedralFunction.constant(2, 3)), box, F(1, 2)) == 0
    assert lipschitz_estimate(builtin_oracle("abs"), Box.cube(1, -1, 1), F(1, 4)) == 1


def test_lipschitz_bounded_by_slopes():
    rng = random.Random(79)
    box = Box.cube(2, -2, 2)
    for _ in range(30):
        f = rand_polyfun(rng, 2)
        est = lipschitz_estimate(from_polyfun(f), box, F(1, 2))
        assert est <= max(abs(a) for lam in f.functionals for a in lam.slope)
