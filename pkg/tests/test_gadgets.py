"""Gadget constructors: coordinates, certificates, side conditions, goals."""

from fractions import Fraction

import pytest

from rigidity_forge.cm import Point, rational_point, sqdist
from rigidity_forge.gadgets import (
    AffineComb,
    CoincidentInputs,
    DegenerateLinkage,
    DegenerateSegment,
    DotZero,
    IrrationalSide,
    NotATranslate,
    NotPerpendicular,
    TOutOfRange,
    VecEq,
    build_division,
    build_kempe,
    build_perp_transfer,
    build_rhombus_chain,
    build_translation_bridge,
    choose_division_radius,
    find_rational_bidistance_point,
    goal_holds,
    kempe_de_length,
)
from rigidity_forge.scalars import QQ, adjoin_sqrt

F = Fraction


def assert_self_consistent(gadget):
    """Certificate entries, side conditions, and the identity-model goal."""
    for entry in gadget.certificate:
        assert sqdist(gadget.points[entry.p], gadget.points[entry.q]) == entry.d2
        assert isinstance(entry.d2, Fraction)
    for a, b in gadget.side_conditions:
        assert not gadget.points[a] == gadget.points[b]
    assert goal_holds(gadget.goal, gadget.points)


# -- division -------------------------------------------------------------------


def test_division_midpoint_instance():
    g = build_division(rational_point(0, 0), rational_point(1, 0), F(1, 2))
    assert g.layout["r"] == 2
    t34 = adjoin_sqrt(QQ, F(3, 4))
    tower, root = t34.tower, t34.root
    assert g.points["D"] == Point(tower.rational(F(1, 2)), root)
    assert g.points["E"] == Point(tower.rational(F(1, 4)), root * F(1, 2))
    assert g.points["F"] == Point(tower.rational(F(3, 4)), root * F(1, 2))
    assert g.points["C"] == rational_point(F(1, 2), 0)
    values = {frozenset((c.p, c.q)): c.d2 for c in g.certificate}
    assert values == {
        frozenset(("A", "E")): F(1, 4),
        frozenset(("E", "D")): F(1, 4),
        frozenset(("A", "D")): F(1),
        frozenset(("B", "F")): F(1, 4),
        frozenset(("F", "D")): F(1, 4),
        frozenset(("B", "D")): F(1),
        frozenset(("E", "C")): F(1, 4),
        frozenset(("F", "C")): F(1, 4),
    }
    assert set(g.side_conditions) == {("E", "F"), ("C", "D")}
    assert g.goal == AffineComb(c="C", a="A", b="B", t=F(1, 2))
    assert_self_consistent(g)


def test_division_irrational_base_accepts_any_radius_above():
    root2 = adjoin_sqrt(QQ, 2)
    a = rational_point(0, 0, root2.tower)
    b = Point(root2.root, root2.tower.rational(0))
    g = build_division(a, b, F(1, 2))
    assert g.layout["r"] == 2  # smallest integer above sqrt(2)
    assert_self_consistent(g)
    forced = build_division(a, b, F(1, 2), r=F(7))
    assert forced.layout["r"] == 7
    assert_self_consistent(forced)


def test_division_radius_interval_for_skew_ratio():
    # t = 1/3 on |AB| = 2: open interval (2, 6); simplest rational is 3
    assert choose_division_radius(QQ.rational(4), F(1, 3)) == 3
    # t = 7/9: |1-2t| = 5/9, |AB| = 1: interval (1, 9/5); simplest is 3/2
    assert choose_division_radius(QQ.rational(1), F(7, 9)) == F(3, 2)


def test_division_rejects_degenerate_inputs():
    a = rational_point(0, 0)
    with pytest.raises(DegenerateSegment):
        build_division(a, a, F(1, 2))
    with pytest.raises(TOutOfRange):
        build_division(a, rational_point(1, 0), F(3, 2))
    with pytest.raises(TOutOfRange):
        build_division(a, rational_point(1, 0), F(0))


def test_division_every_t_in_sample_range():
    for t in (F(1, 3), F(2, 5), F(7, 9), F(1, 7), F(5, 6)):
        g = build_division(rational_point(0, 0), rational_point(2, 0), t)
        assert g.goal.t == t
        assert_self_consistent(g)


# -- rhombus chains ----------------------------------------------------------------


def test_chain_zero_translation_is_trivial():
    g = build_rhombus_chain(rational_point(0, 0), rational_point(0, 0), rational_point(1, 0), rational_point(1, 0))
    assert g.layout["track1"] == ["A0"]
    assert g.certificate == ()
    assert_self_consistent(g)


def test_chain_unit_square_two_links():
    g = build_rhombus_chain(rational_point(0, 0), rational_point(1, 0), rational_point(0, 1), rational_point(1, 1))
    track1 = g.layout["track1"]
    assert len(track1) == 3  # m = 2 zig-zag steps
    assert all(c.d2 == 1 for c in g.certificate)
    # every rhombus has its four sides certified at s^2 = 1
    t1, t2 = g.layout["track1"], g.layout["track2"]
    cert_pairs = {frozenset((c.p, c.q)) for c in g.certificate}
    for i in range(2):
        assert frozenset((t1[i], t2[i])) in cert_pairs
        assert frozenset((t1[i], t1[i + 1])) in cert_pairs
        assert frozenset((t2[i], t2[i + 1])) in cert_pairs
        assert frozenset((t1[i + 1], t2[i + 1])) in cert_pairs
    assert_self_consistent(g)


def test_chain_long_translation_chunking():
    g = build_rhombus_chain(rational_point(0, 0), rational_point(5, 0), rational_point(0, 1), rational_point(5, 1))
    assert len(g.layout["track1"]) - 1 == 6  # 3 chunks x 2 steps
    assert_self_consistent(g)


def test_chain_steps_avoid_diagonal_directions():
    g = build_rhombus_chain(rational_point(0, 0), rational_point(5, 0), rational_point(0, 1), rational_point(5, 1))
    pts = g.points
    t1 = g.layout["track1"]
    w = pts[g.layout["track2"][0]] - pts[t1[0]]
    for i in range(len(t1) - 1):
        step = pts[t1[i + 1]] - pts[t1[i]]
        assert not step == w
        assert not step == -w


def test_chain_rejects_bad_input():
    with pytest.raises(NotATranslate):
        build_rhombus_chain(rational_point(0, 0), rational_point(1, 0), rational_point(0, 1), rational_point(2, 1))
    root2 = adjoin_sqrt(QQ, 2)
    c = Point(root2.root, root2.tower.rational(0))
    d = Point(root2.root + 1, root2.tower.rational(0))
    with pytest.raises(IrrationalSide):
        build_rhombus_chain(rational_point(0, 0), rational_point(1, 0), c, d)


# -- translation bridge ---------------------------------------------------------------


def test_bridge_same_start_degenerates_to_single_chain():
    a, b = rational_point(0, 0), rational_point(1, 0)
    g = build_translation_bridge(a, b, a, b)
    assert len(g.layout["sub"]) == 1
    assert_self_consistent(g)


def test_bridge_rational_gap_uses_one_chain():
    root2 = adjoin_sqrt(QQ, 2)
    s2 = root2.root
    c = Point(s2, s2)  # |AC| = 2 exactly
    d = Point(s2 + 1, s2)
    g = build_translation_bridge(rational_point(0, 0), rational_point(1, 0), c, d)
    assert len(g.layout["sub"]) == 1
    assert_self_consistent(g)


def test_bridge_irrational_gap_inserts_waypoint():
    root2 = adjoin_sqrt(QQ, 2)
    s2 = root2.root
    c = Point(s2, s2 + 1)  # |AC|^2 = 5 + 2*sqrt(2), irrational
    d = Point(s2 + 1, s2 + 1)
    g = build_translation_bridge(rational_point(0, 0), rational_point(1, 0), c, d)
    assert len(g.layout["sub"]) == 2
    first, last = g.layout["sub"]
    # the two chains share their middle track endpoints (the waypoint pair)
    assert first["track2"][0] == last["track1"][0]
    assert first["track2"][-1] == last["track1"][-1]
    assert g.goal == VecEq(a=first["track1"][0], b=first["track1"][-1], c=last["track2"][0], d=last["track2"][-1])
    assert_self_consistent(g)


def test_bridge_goal_composes_sub_goals():
    root2 = adjoin_sqrt(QQ, 2)
    s2 = root2.root
    g = build_translation_bridge(
        rational_point(0, 0), rational_point(1, 0), Point(s2, s2 + 1), Point(s2 + 1, s2 + 1)
    )
    subs = g.layout["sub"]
    assert [s["kind"] for s in subs] == ["chain", "chain"]
    assert g.goal.a == subs[0]["track1"][0]
    assert g.goal.d == subs[-1]["track2"][-1]


# -- Kempe linkage ----------------------------------------------------------------------


def test_kempe_unit_parameter_coordinates():
    g = build_kempe(F(1))
    assert g.points["C"] == rational_point(4, 2)
    assert g.points["D"] == rational_point(F(12, 5), F(16, 5))
    assert g.points["E"] == rational_point(F(12, 5), F(4, 5))
    assert g.goal == DotZero(a="D", b="E", c="A", d="B")
    assert len(g.certificate) == 8
    assert set(g.side_conditions) == {("B", "D"), ("B", "E")}
    assert_self_consistent(g)


def test_kempe_derived_image_distances():
    g = build_kempe(F(1))
    pts = g.points
    a = sqdist(pts["B"], pts["D"]).as_fraction()
    b = sqdist(pts["A"], pts["C"]).as_fraction()
    c = sqdist(pts["B"], pts["E"]).as_fraction()
    d = sqdist(pts["C"], pts["F"]).as_fraction()
    e = sqdist(pts["A"], pts["E"]).as_fraction()
    assert (a, b, c, d, e) == (F(64, 5), F(20), F(16, 5), F(5), F(32, 5))
    assert e == 16 - 3 * c
    assert b == 4 * d
    assert a == 4 * c
    assert c * d == -(d * d - 10 * d + 9)


def test_kempe_tangency_rejected():
    with pytest.raises(DegenerateLinkage):
        build_kempe(F(0))


def test_kempe_perpendicularity_for_sample_parameters():
    for t in (F(1), F(1, 2), F(2), F(3, 4), F(5, 7)):
        g = build_kempe(t)
        pts = g.points
        assert pts["D"].x == pts["E"].x
        assert ((pts["D"] - pts["E"]).dot(pts["B"] - pts["A"])).is_zero()
        assert_self_consistent(g)


def test_kempe_vertical_alignment_symbolically():
    """D and E share their x-coordinate as an identity in the parameter.

    The reflection construction is replayed over the polynomial ring with a
    shared denominator, so the check covers every admissible parameter."""
    from rigidity_forge.poly import variables

    (t,) = variables("t")
    one = t * 0 + 1
    # C = B + 2*(cos, sin) with a common denominator 1 + t^2
    den_c = one + t * t
    cx_num = 4 * den_c + 2 * (one - t * t)
    cy_num = 2 * (2 * t)

    def reflect_x(px_num, py_num, den, cx_num_, cy_num_, cden, bx, by):
        # reflection of B across the line through (p, c); returns x-numerator
        # and the common denominator of the image point
        vx = cx_num_ * den - px_num * cden
        vy = cy_num_ * den - py_num * cden
        ux = bx * den * cden - px_num * cden
        uy = by * den * cden - py_num * cden
        q = vx * vx + vy * vy
        dot = ux * vx + uy * vy
        # X = p + 2 (u.v/q) v - u, cleared over den*cden*q
        x_num = px_num * cden * q + 2 * dot * vx - ux * q
        return x_num, den * cden * q

    # D: reflect B=(4,0) across (A=(0,0), C); E: reflect B across (C, F=(3,0))
    dx_num, dden = reflect_x(t * 0, t * 0, one, cx_num, cy_num, den_c, 4, 0)
    ex_num, eden = reflect_x(cx_num, cy_num, den_c, 3 * den_c, t * 0, den_c, 4, 0)
    assert dx_num * eden == ex_num * dden


# -- perpendicularity transfer ---------------------------------------------------------------


def test_perp_transfer_unrotated_instance():
    g = build_perp_transfer(
        rational_point(0, 0), rational_point(0, F(12, 5)), rational_point(0, 0), rational_point(4, 0)
    )
    assert g.layout["r"] == 1
    assert g.layout["s"] == 1
    assert isinstance(g.goal, DotZero)
    assert_self_consistent(g)


def test_perp_transfer_scaled_instance():
    g = build_perp_transfer(
        rational_point(0, 0), rational_point(0, F(24, 5)), rational_point(0, 0), rational_point(8, 0)
    )
    assert g.layout["r"] == 2
    assert g.layout["s"] == 2
    assert_self_consistent(g)


def test_perp_transfer_rejects_non_perpendicular():
    with pytest.raises(NotPerpendicular):
        build_perp_transfer(rational_point(0, 0), rational_point(1, 1), rational_point(0, 0), rational_point(1, 0))


def test_perp_transfer_irrational_component_solves_symbolically():
    # PQ has irrational length: the linkage parameter comes from the quadratic
    root2 = adjoin_sqrt(QQ, 2)
    s2 = root2.root
    p = rational_point(0, 0, root2.tower)
    q = Point(root2.tower.rational(0), s2)
    g = build_perp_transfer(p, q, rational_point(0, 0), rational_point(4, 0))
    assert_self_consistent(g)
    pts = g.points
    roles = g.layout["kempe"]["roles"]
    de = pts[roles["D"]] - pts[roles["E"]]
    r = g.layout["r"]
    assert (q - p) == de.scaled(r)


def test_kempe_de_length_formula():
    assert kempe_de_length(F(1)) == F(12, 5)
    assert kempe_de_length(F(3)) == 4


# -- bidistance witness points -----------------------------------------------------------------


def test_bidistance_equal_mode():
    w, q1, q2 = find_rational_bidistance_point(rational_point(0, 0), rational_point(1, 0), "equal_distances")
    assert q1 == q2 == 1
    t34 = adjoin_sqrt(QQ, F(3, 4))
    assert w == Point(t34.tower.rational(F(1, 2)), t34.root)
    assert sqdist(rational_point(0, 0), w) == q1 * q1


def test_bidistance_distinct_mode():
    root2 = adjoin_sqrt(QQ, 2)
    p2 = Point(root2.root, root2.tower.rational(0))
    w, q1, q2 = find_rational_bidistance_point(rational_point(0, 0), p2, "distinct_distances")
    assert q1 != q2
    assert sqdist(rational_point(0, 0), w) == q1 * q1
    assert sqdist(p2, w) == q2 * q2
    assert abs(q1 - q2) < 3  # triangle inequality held exactly at build time


def test_bidistance_coincident_inputs():
    with pytest.raises(CoincidentInputs):
        find_rational_bidistance_point(rational_point(0, 0), rational_point(0, 0))


# -- cross-cutting invariants --------------------------------------------------------------------


def corpus():
    root2 = adjoin_sqrt(QQ, 2)
    yield build_division(rational_point(0, 0), rational_point(1, 0), F(1, 2))
    yield build_division(rational_point(0, 0), rational_point(2, 0), F(2, 5))
    yield build_rhombus_chain(rational_point(0, 0), rational_point(3, 0), rational_point(0, 2), rational_point(3, 2))
    yield build_translation_bridge(
        rational_point(0, 0), rational_point(1, 0), Point(root2.root, root2.root + 1), Point(root2.root + 1, root2.root + 1)
    )
    yield build_kempe(F(1, 2))
    yield build_perp_transfer(rational_point(0, 0), rational_point(0, F(12, 5)), rational_point(0, 0), rational_point(4, 0))


@pytest.mark.parametrize("gadget", list(corpus()), ids=lambda g: g.layout["kind"])
def test_corpus_self_consistency(gadget):
    assert_self_consistent(gadget)


@pytest.mark.parametrize("gadget", list(corpus()), ids=lambda g: g.layout["kind"])
def test_corpus_certificates_are_rational(gadget):
    for entry in gadget.certificate:
        assert isinstance(entry.d2, Fraction)


@pytest.mark.parametrize("gadget", list(corpus()), ids=lambda g: g.layout["kind"])
def test_corpus_towers_are_minimized(gadget):
    used = 0
    for p in gadget.points.values():
        for coord in (p.x, p.y):
            used = max(used, coord.minimized().tower.depth)
    assert gadget.tower.depth == used
