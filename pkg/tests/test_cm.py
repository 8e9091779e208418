"""Bordered squared-distance determinants and the two vector lemmas."""

import random
from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from rigidity_forge.cm import (
    DegenerateSum,
    Point,
    PreconditionViolated,
    Vec2,
    affinely_dependent3,
    cm3,
    cm3_points,
    cm4,
    cm4_points,
    prop3_verify,
    prop4_verify,
    rational_point,
    sqdist,
)
from rigidity_forge.scalars import QQ, FunElem, adjoin_sqrt

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=10)


def rand_frac(rng, span=40, den=12):
    return Fraction(rng.randint(-span, span), rng.randint(1, den))


# -- squared distances ------------------------------------------------------------


def test_sqdist_examples():
    assert sqdist(rational_point(0, 0), rational_point(1, 0)) == 1
    t3 = adjoin_sqrt(QQ, 3)
    vertex = Point(t3.tower.rational(Fraction(1, 2)), t3.root * Fraction(1, 2))
    assert sqdist(rational_point(0, 0, t3.tower), vertex) == 1


def test_sqdist_over_function_field():
    eps = FunElem.eps()
    p = Point(FunElem.constant(0), FunElem.constant(0))
    q = Point(eps, FunElem.constant(1))
    assert sqdist(p, q) == 1 + eps * eps


# -- three-point determinant ----------------------------------------------------------


def test_cm3_unit_triangle():
    assert cm3(1, 1, 1) == -3


def test_cm3_collinear_pattern():
    # squared distances a^2, (a+b)^2, b^2 with a=1, b=2
    assert cm3(1, 9, 4) == 0


def test_cm3_coincident_pattern():
    assert cm3(0, 4, 4) == 0


def test_cm3_permutation_invariance():
    rng = random.Random(3)
    for _ in range(20):
        pts = [(rand_frac(rng), rand_frac(rng)) for _ in range(3)]
        points = [rational_point(x, y) for x, y in pts]
        reference = cm3_points(*points)
        for perm in permutations(points):
            assert cm3_points(*perm) == reference


def test_cm3_translation_invariance():
    rng = random.Random(5)
    for _ in range(20):
        pts = [rational_point(rand_frac(rng), rand_frac(rng)) for _ in range(3)]
        shift = Vec2(rand_frac(rng), rand_frac(rng))
        shifted = [p + shift for p in pts]
        assert cm3_points(*pts) == cm3_points(*shifted)


# -- four-point determinant --------------------------------------------------------------


def test_cm4_unit_square():
    assert cm4(1, 1, 2, 2, 1, 1) == 0
    assert cm4(1, 2, 1, 1, 2, 1) == 0


def test_cm4_kempe_instance():
    # A,B,E,F image distances at the t=1 linkage: e - 16 + 3c = 0
    assert cm4(Fraction(16), Fraction(32, 5), Fraction(9), Fraction(16, 5), Fraction(1), Fraction(1)) == 0


def test_cm4_planar_points_vanish():
    rng = random.Random(7)
    for _ in range(200):
        pts = [rational_point(rand_frac(rng), rand_frac(rng)) for _ in range(4)]
        assert cm4_points(*pts) == 0


def test_cm4_permutation_invariance():
    rng = random.Random(9)
    pts = [rational_point(rand_frac(rng), rand_frac(rng)) for _ in range(4)]
    reference = cm4_points(*pts)
    for perm in permutations(pts):
        assert cm4_points(*perm) == reference


# -- affine dependence ----------------------------------------------------------------------


def test_affinely_dependent_examples():
    assert affinely_dependent3(rational_point(0, 0), rational_point(1, 0), rational_point(2, 0))
    assert not affinely_dependent3(rational_point(0, 0), rational_point(1, 0), rational_point(0, 1))


def test_affine_dependence_matches_cross_product_oracle():
    rng = random.Random(11)
    for trial in range(1000):
        if trial < 200:
            base = (rand_frac(rng), rand_frac(rng))
            direction = (rand_frac(rng), rand_frac(rng))
            l1, l2 = rand_frac(rng), rand_frac(rng)
            raw = [
                base,
                (base[0] + l1 * direction[0], base[1] + l1 * direction[1]),
                (base[0] + l2 * direction[0], base[1] + l2 * direction[1]),
            ]
        else:
            raw = [(rand_frac(rng), rand_frac(rng)) for _ in range(3)]
        cross = (raw[1][0] - raw[0][0]) * (raw[2][1] - raw[0][1]) - (raw[1][1] - raw[0][1]) * (
            raw[2][0] - raw[0][0]
        )
        points = [rational_point(x, y) for x, y in raw]
        assert affinely_dependent3(*points) == (cross == 0)


# -- ratio lemma ---------------------------------------------------------------------------------


def test_prop3_interior_point():
    cert = prop3_verify(rational_point(0, 0), rational_point(1, 0), rational_point(3, 0), Fraction(1), Fraction(2))
    assert cert.ratio == Fraction(1, 3)


def test_prop3_negative_branch():
    cert = prop3_verify(rational_point(0, 0), rational_point(2, 0), rational_point(1, 0), Fraction(2), Fraction(-1))
    assert cert.ratio == 2


def test_prop3_oblique():
    z = rational_point(0, 0)
    x = rational_point(Fraction(3, 5), Fraction(4, 5))
    xt = rational_point(Fraction(6, 5), Fraction(8, 5))
    cert = prop3_verify(z, x, xt, Fraction(1), Fraction(1))
    assert cert.ratio == Fraction(1, 2)


def test_prop3_degenerate_sum():
    with pytest.raises(DegenerateSum):
        prop3_verify(rational_point(0, 0), rational_point(2, 0), rational_point(0, 0), Fraction(2), Fraction(-2))


def test_prop3_pattern_violation():
    with pytest.raises(PreconditionViolated):
        prop3_verify(rational_point(0, 0), rational_point(1, 0), rational_point(3, 0), Fraction(1), Fraction(1))


@settings(max_examples=40, deadline=None)
@given(rationals, rationals, st.fractions(min_value=1, max_value=9, max_denominator=6))
def test_prop3_on_scaled_unit_directions(zx, zy, a):
    # z, z + a*u, z + (a+b)*u with u = (3/5, 4/5) and b = 1
    b = Fraction(1)
    u = (Fraction(3, 5), Fraction(4, 5))
    z = rational_point(zx, zy)
    x = rational_point(zx + a * u[0], zy + a * u[1])
    xt = rational_point(zx + (a + b) * u[0], zy + (a + b) * u[1])
    cert = prop3_verify(z, x, xt, a, b)
    assert cert.ratio == a / (a + b)


# -- parallelogram lemma -----------------------------------------------------------------------------


def test_prop4_axis_example():
    cert = prop4_verify(rational_point(1, 0), rational_point(-1, 0), rational_point(0, 1), rational_point(0, -1))
    assert cert.ec == Vec2(QQ.rational(-1), QQ.rational(1))


def test_prop4_division_gadget_quadruple():
    t3 = adjoin_sqrt(QQ, Fraction(3, 4))
    tower = t3.tower
    root = t3.root  # sqrt(3)/2
    e = Point(tower.rational(Fraction(1, 4)), root * Fraction(1, 2))
    f = Point(tower.rational(Fraction(3, 4)), root * Fraction(1, 2))
    c = Point(tower.rational(Fraction(1, 2)), tower.rational(0))
    d = Point(tower.rational(Fraction(1, 2)), root)
    cert = prop4_verify(e, f, c, d)
    assert cert.ec == Vec2(tower.rational(Fraction(1, 4)), -root * Fraction(1, 2))
    assert cert.ec == f - d
    assert cert.fc == e - d


def test_prop4_rejects_coincident_cd():
    c = rational_point(0, 1)
    with pytest.raises(PreconditionViolated, match="C = D"):
        prop4_verify(rational_point(1, 0), rational_point(-1, 0), c, c)


def test_prop4_reports_failed_distance():
    with pytest.raises(PreconditionViolated, match="F,C"):
        prop4_verify(rational_point(1, 0), rational_point(-2, 0), rational_point(0, 1), rational_point(0, -1))


def test_prop4_matches_reflection_construction():
    # C on the perpendicular bisector of EF, D its reflection through the
    # midpoint: all four preconditions hold by construction
    rng = random.Random(13)
    built = 0
    while built < 30:
        e = rational_point(rand_frac(rng), rand_frac(rng))
        f = rational_point(rand_frac(rng), rand_frac(rng))
        lam = rand_frac(rng)
        if e == f or lam == 0:
            continue
        mid_x = (e.x + f.x) * Fraction(1, 2)
        mid_y = (e.y + f.y) * Fraction(1, 2)
        perp = Vec2(-(f.y - e.y), f.x - e.x)
        c = Point(mid_x + lam * perp.x, mid_y + lam * perp.y)
        d = Point(mid_x - lam * perp.x, mid_y - lam * perp.y)
        cert = prop4_verify(e, f, c, d)
        assert cert.ec == f - d
        assert cert.fc == e - d
        built += 1
