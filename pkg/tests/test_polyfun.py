import itertools
import random
from fractions import Fraction as F

import pytest

from polymax.polyfun import (
    MINUS_INFINITY,
    HullError,
    LineParam,
    PolyhedralFunction,
    active_set,
    breakpoints,
    canonicalize,
    certify_affine_on_hull,
    dir_deriv,
    domain_of_affinity,
    domains_of_affinity,
    partial_conjugate,
    restrict,
    support_at,
    trop_add,
    trop_mul,
    verify_slope_decomposition,
)
from polymax.polyhedron import contains, dimension
from polymax.ratfun import AffineFunctional, DimensionError

from _gen import rand_polyfun, rand_rat, transintegral_2d

P = PolyhedralFunction.of
X = P(((1,), 0))
ZERO1 = P(((0,), 0))


def fx(*terms):
    return {AffineFunctional.of(s, c) for s, c in terms}


def grid(n, lo, hi, step=F(1)):
    k = int((hi - lo) / step)
    axis = [lo + i * step for i in range(k + 1)]
    return list(itertools.product(*([axis] * n)))


def same_on(f, g, pts):
    return all(f(p) == g(p) for p in pts)


# -- evaluation and the tropical operations


def test_eval_examples():
    f = P(((1, 1), 0), ((2, 0), -1), ((0, 0), 0))
    assert f((F(1), F(2))) == 3
    assert P(((1,), 0), ((0,), 0))((F(-5),)) == 0
    assert P(((1,), 0), ((-1,), 0))((F(0),)) == 0
    with pytest.raises(DimensionError):
        f((F(1),))


def test_active_set_examples():
    a = P(((1,), 0), ((-1,), 0))
    assert active_set(a, (F(0),)) == {0, 1}
    assert active_set(a, (F(2),)) == {0}
    assert active_set(ZERO1, (F(9),)) == {0}


def test_trop_add_examples():
    assert set(trop_add(X, ZERO1).functionals) == fx(((1,), 0), ((0,), 0))
    f = P(((1,), 0), ((1,), 0), ((0,), -3), ((-1,), 0))
    assert trop_add(f, f) == canonicalize(f)
    assert trop_add(X, P(((1,), 1))).functionals == (AffineFunctional.of((1,), 1),)


def test_trop_mul_examples():
    assert trop_mul(X, ZERO1).functionals == (AffineFunctional.of((1,), 0),)
    sq = trop_mul(P(((1,), 0), ((0,), 0)), P(((1,), 0), ((0,), 0)))
    # grid oracle for 2 max(x, 0)
    assert all(sq((t,)) == 2 * max(t, 0) for t in (F(k, 4) for k in range(-20, 21)))
    assert set(sq.functionals) == fx(((2,), 0), ((0,), 0))
    assert trop_mul(P(((0, 1), 0)), P(((1, 0), 0))).functionals == (AffineFunctional.of((1, 1), 0),)
    with pytest.raises(DimensionError):
        trop_mul(X, P(((1, 0), 0)))


# -- canonical form


def test_canonicalize_examples():
    f = P(((1,), 0), ((-1,), 0), ((0,), 0))
    g = canonicalize(f)
    assert g.functionals == (AffineFunctional.of((-1,), 0), AffineFunctional.of((1,), 0))
    assert same_on(f, g, [(F(k, 4),) for k in range(-12, 13)])
    assert canonicalize(P(((1,), 0), ((1,), 1))).functionals == (AffineFunctional.of((1,), 1),)
    assert canonicalize(X) == X


def test_canonicalize_matches_grid_oracle():
    rng = random.Random(101)
    grids = {n: grid(n, F(-4), F(4)) for n in (1, 2, 3)}
    for _ in range(300):
        n = rng.randint(1, 3)
        f = rand_polyfun(rng, n, k_max=6, integer_slopes=False)
        g = canonicalize(f)
        assert len(g) <= len(f)
        assert same_on(f, g, grids[n]), f
        assert list(g.functionals) == sorted(set(g.functionals))


def test_canonicalize_kept_functionals_are_needed():
    # each kept functional strictly wins somewhere: dropping it changes the value
    # at a point found by an exact search along the segment between far-apart corners
    rng = random.Random(3)
    for _ in range(100):
        f = rand_polyfun(rng, 1, k_max=6, integer_slopes=False)
        g = canonicalize(f)
        for lam in g.functionals:
            others = [m for m in g.functionals if m != lam]
            if not others:
                continue
            pts = [(F(k, 64),) for k in range(-64 * 40, 64 * 40 + 1, 7)]
            bps = breakpoints(g)
            pts += [(b,) for b in bps] + [((a + b) / 2,) for a, b in zip(bps, bps[1:])]
            pts += [(bps[0] - 1,), (bps[-1] + 1,)] if bps else []
            assert any(lam(p) > max(m(p) for m in others) for p in pts), (f, lam)


def test_canonicalize_idempotent_and_representation_free():
    rng = random.Random(7)
    for _ in range(100):
        n = rng.randint(1, 3)
        f = rand_polyfun(rng, n)
        g = canonicalize(f)
        assert canonicalize(g) == g
        # pad with functionals sitting below f: shifted copies and convex combinations
        extra = [AffineFunctional(lam.slope, lam.const - rand_rat(rng, 0, 3, 4)) for lam in f.functionals]
        if len(f) >= 2:
            a, b = rng.sample(list(f.functionals), 2)
            w = rand_rat(rng, 0, 1, 5)
            extra.append(AffineFunctional(tuple(w * p + (1 - w) * q for p, q in zip(a.slope, b.slope)),
                                          w * a.const + (1 - w) * b.const))
        padded = list(f.functionals) + extra
        rng.shuffle(padded)
        assert canonicalize(PolyhedralFunction(n, tuple(padded))) == g


def test_json_round_trip():
    f = P(((F(1, 2), -3), F(7, 5)), ((0, 0), 0))
    assert PolyhedralFunction.from_json(f.to_json()) == f
    with pytest.raises(ValueError):
        PolyhedralFunction.from_json({"n": 1, "functionals": []})


# -- supports, restriction, derivatives


def test_support_at_examples():
    assert support_at(P(((1,), 0), ((-1,), 0)), (F(0),)) == AffineFunctional.of((-1,), 0)
    assert support_at(P(((1,), 0), ((0,), 0)), (F(3),)) == AffineFunctional.of((1,), 0)
    assert support_at(P(((1, 1), 0), ((0, 0), 0)), (F(-1), F(-1))) == AffineFunctional.of((0, 0), 0)


def test_support_is_global_minorant():
    rng = random.Random(13)
    pts = grid(2, F(-2), F(2), F(1, 2))
    assert len(pts) == 81
    for _ in range(100):
        f = rand_polyfun(rng, 2, integer_slopes=False)
        x = (rand_rat(rng, -3, 3, 4), rand_rat(rng, -3, 3, 4))
        lam = support_at(f, x)
        assert lam(x) == f(x)
        assert all(f(y) >= lam(y) for y in pts)


def test_restrict_examples():
    f = P(((1, 0), 0), ((0, 1), 0), ((0, 0), 0))
    assert set(restrict(f, LineParam((0, 0), (1, 1))).functionals) == fx(((1,), 0), ((0,), 0))
    assert set(restrict(f, LineParam((1, 0), (0, 1))).functionals) == fx(((1,), 0), ((0,), 1))
    assert restrict(X, LineParam((0,), (1,))) == X
    with pytest.raises(ValueError):
        LineParam((0, 0), (0, 0))
    with pytest.raises(DimensionError):
        restrict(f, LineParam((0,), (1,)))


def test_restrict_commutes_with_eval():
    rng = random.Random(17)
    for _ in range(200):
        n = rng.randint(1, 3)
        f = rand_polyfun(rng, n, integer_slopes=False)
        base = tuple(rand_rat(rng, -3, 3, 5) for _ in range(n))
        d = tuple(rand_rat(rng, -2, 2, 3) for _ in range(n))
        if not any(d):
            continue
        line = LineParam(base, d)
        t = rand_rat(rng, -5, 5, 7)
        assert restrict(f, line)((t,)) == f(line.at(t))


def test_dir_deriv_examples():
    a = P(((1,), 0), ((-1,), 0))
    assert dir_deriv(a, (F(0),), (F(1),)) == 1
    assert dir_deriv(a, (F(0),), (F(-1),)) == 1
    assert dir_deriv(P(((1, 1), 0), ((0, 0), 0)), (F(0), F(0)), (F(1), F(-1))) == 0
    with pytest.raises(ValueError):
        dir_deriv(a, (F(0),), (F(0),))


def test_dir_deriv_matches_small_secants():
    rng = random.Random(19)
    for _ in range(200):
        n = rng.randint(1, 3)
        f = rand_polyfun(rng, n, integer_slopes=False)
        x = tuple(rand_rat(rng, -2, 2, 4) for _ in range(n))
        z = tuple(F(rng.randint(-2, 2)) for _ in range(n))
        if not any(z):
            continue
        g = restrict(f, LineParam(x, z))
        # first kink to the right of t = 0 bounds the affine stretch
        ahead = [b for b in breakpoints(g) if b > 0]
        t0 = min(ahead) if ahead else F(1)
        d = dir_deriv(f, x, z)
        for k in (1, 2, 3, 7, 100):
            t = t0 / k
            xt = tuple(a + t * b for a, b in zip(x, z))
            assert (f(xt) - f(x)) / t == d


def test_dir_deriv_is_convex_on_a_domain_of_affinity():
    # x1, x2 share a closed domain U on which f is affine; off such a U the
    # map x -> f'(x, z) need not be convex (f = |x| with z = 1 at x = -1, 0, 1)
    rng = random.Random(23)
    pts = grid(2, F(-3), F(3), F(1, 4))
    checked = 0
    while checked < 200:
        f = canonicalize(rand_polyfun(rng, 2))
        z = (F(rng.randint(-2, 2)), F(rng.randint(-2, 2)) or F(1))
        region = rng.choice(domains_of_affinity(f)).region
        inside = [p for p in pts if contains(region, p)]
        if len(inside) < 2:
            continue
        checked += 1
        x1, x2 = rng.choice(inside), rng.choice(inside)
        t = rand_rat(rng, 0, 1, 8)
        xm = tuple(t * a + (1 - t) * b for a, b in zip(x1, x2))
        assert t * dir_deriv(f, x1, z) + (1 - t) * dir_deriv(f, x2, z) >= dir_deriv(f, xm, z)


def test_dir_deriv_constant_on_domain_interiors():
    rng = random.Random(29)
    pts = grid(2, F(-4), F(4), F(1, 4))
    for _ in range(50):
        f = canonicalize(rand_polyfun(rng, 2))
        z = (F(rng.randint(-3, 3)), F(rng.randint(1, 3)))
        for dom in domains_of_affinity(f):
            # canonical domains are full-dimensional, so interior means every constraint strict
            assert dimension(dom.region) == 2
            inner = [p for p in pts if all(h(p) > 0 for h in dom.region.functionals)]
            sample = rng.sample(inner, min(20, len(inner)))
            assert len({dir_deriv(f, p, z) for p in sample}) <= 1


# -- domains of affinity and hull certification


def test_domain_of_affinity_examples():
    f = P(((1,), 0), ((0,), 0))
    d = domain_of_affinity(f, 1)
    assert contains(d.region, (F(-3),)) and contains(d.region, (F(0),)) and not contains(d.region, (F(1, 9),))
    g = P(((1, 0), 0), ((0, 1), 0), ((0, 0), 0))
    r = domain_of_affinity(g, 0).region
    assert set(r.functionals) == fx(((1, -1), 0), ((1, 0), 0))
    assert domain_of_affinity(X, 0).region.halfspaces == ()
    with pytest.raises(IndexError):
        domain_of_affinity(X, 1)


def test_domains_cover_and_agree():
    rng = random.Random(31)
    pts = grid(2, F(-3), F(3), F(1, 2))
    for _ in range(50):
        f = rand_polyfun(rng, 2)
        doms = domains_of_affinity(f)
        for p in pts:
            inside = [d for d in doms if contains(d.region, p)]
            assert inside
            assert all(d.functional(p) == f(p) for d in inside)


def test_certify_affine_on_hull_examples():
    f = P(((1,), 0), ((0,), 0))
    zero = AffineFunctional.of((0,), 0)
    assert certify_affine_on_hull(f, [(F(-2),), (F(-1),)], (F(-3, 2),), zero)
    assert not certify_affine_on_hull(f, [(F(-1),), (F(1),)], (F(0),), zero)
    g = P(((1, 1), 0), ((0, 0), 0))
    assert certify_affine_on_hull(g, [(1, 0), (0, 1), (1, 1)], (F(2, 3), F(2, 3)), AffineFunctional.of((1, 1), 0))


def test_certify_refuses_flat_or_exterior_centers():
    g = P(((1, 1), 0), ((0, 0), 0))
    lam = AffineFunctional.of((1, 1), 0)
    with pytest.raises(HullError):
        certify_affine_on_hull(g, [(0, 0), (1, 1), (2, 2)], (F(1), F(1)), lam)
    with pytest.raises(HullError):
        certify_affine_on_hull(g, [(1, 0), (0, 1), (1, 1)], (F(1), F(1)), lam)


# -- the partial infimum transform


def _brute_inf(f, x1, x2, z, m, t):
    """Minimum of u -> f(x1 + t(x2-x1) + u z) - m u over a quarter grid on [-20, 20]."""
    best = None
    for k in range(-80, 81):
        u = F(k, 4)
        x = tuple(a + t * (b - a) + u * c for a, b, c in zip(x1, x2, z))
        v = f(x) - m * u
        best = v if best is None else min(best, v)
    return best


FRAME = ((0, 0), (1, 0), (0, 1))


def test_partial_conjugate_examples():
    f = P(((1, 0), 0), ((0, 1), 0))
    ts = [F(k, 4) for k in range(5)]
    g0 = partial_conjugate(f, *FRAME, 0)
    g1 = partial_conjugate(f, *FRAME, 1)
    assert all(g0((t,)) == t == _brute_inf(f, *FRAME, 0, t) for t in ts)
    assert all(g1((t,)) == 0 == _brute_inf(f, *FRAME, 1, t) for t in ts)
    assert partial_conjugate(f, *FRAME, 2) is MINUS_INFINITY
    with pytest.raises(ValueError):
        partial_conjugate(f, (0, 0), (0, 0), (0, 1), 0)


def _crossings_inf(f, x1, x2, z, m, t):
    """Exact infimum by checking every kink of the inner function of u."""
    lines = []
    for lam in f.functionals:
        base = tuple(a + t * (b - a) for a, b in zip(x1, x2))
        lines.append((lam.linear(z), lam(base)))
    us = {F(0)}
    for (s1, c1), (s2, c2) in itertools.combinations(lines, 2):
        if s1 != s2:
            us.add((c2 - c1) / (s1 - s2))
    return min(max(s * u + c for s, c in lines) - m * u for u in us)


def test_partial_conjugate_matches_exhaustive_kinks():
    rng = random.Random(37)
    for _ in range(60):
        f = rand_polyfun(rng, 2, k_max=5)
        x1 = (rand_rat(rng, -2, 2, 3), rand_rat(rng, -2, 2, 3))
        x2 = (rand_rat(rng, -2, 2, 3), rand_rat(rng, -2, 2, 3))
        z = (F(rng.randint(-2, 2)), F(rng.randint(1, 2)))
        if x1 == x2:
            continue
        us = sorted({lam.linear(z) for lam in f.functionals})
        for m in range(int(us[0]) - 1, int(us[-1]) + 2):
            g = partial_conjugate(f, x1, x2, z, m)
            if m < us[0] or m > us[-1]:
                assert g is MINUS_INFINITY
                continue
            for k in range(5):
                t = F(k, 4)
                assert g((t,)) == _crossings_inf(f, x1, x2, z, m, t)


def test_slope_decomposition_examples():
    f = P(((1, 0), 0), ((0, 1), 0))
    samples = [(t, u) for t in (0, F(1, 2), 1) for u in (-2, 0, 2)]
    assert verify_slope_decomposition(f, *FRAME, samples)
    assert verify_slope_decomposition(P(((1, 1), 0), ((0, 0), 0)), *FRAME, samples)
    bad = verify_slope_decomposition(f, *FRAME, samples, slope_set=[0])
    assert not bad.ok
    assert (bad.failure["t"], bad.failure["u"]) == ("0", "2")


def test_slope_decomposition_random():
    rng = random.Random(41)
    samples = [(F(i, 4), F(j, 2) - 1) for i in range(5) for j in range(5)]
    for _ in range(20):
        f = transintegral_2d(rng)
        assert verify_slope_decomposition(f, *FRAME, samples)


# -- semiring laws


def test_semiring_laws():
    rng = random.Random(43)
    for _ in range(100):
        f, g, h = (rand_polyfun(rng, 2, k_max=3) for _ in range(3))
        assert trop_add(trop_add(f, g), h) == trop_add(f, trop_add(g, h))
        assert trop_add(f, g) == trop_add(g, f)
        assert trop_add(f, f) == canonicalize(f)
        assert trop_mul(trop_mul(f, g), h) == trop_mul(f, trop_mul(g, h))
        assert trop_mul(f, g) == trop_mul(g, f)
        assert trop_mul(f, trop_add(g, h)) == trop_add(trop_mul(f, g), trop_mul(f, h))
