"""Finite rigidity gadgets: explicit coordinates plus rational squared-distance
certificates whose image constraints force a geometric conclusion.

Every constructor returns a self-consistent :class:`Gadget`: re-computing the
squared-distance form on the stored coordinates reproduces every certificate
entry exactly, every certified value is rational, and the goal holds for the
identity mapping on the gadget's own coordinates.  The ``layout`` field is a
JSON-able recipe recording how the configuration was assembled; the deduction
engine replays proofs by walking it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .cm import Point, Vec2, _is_zero, sqdist
from .scalars import (
    QQ,
    TowerDesc,
    TowerElem,
    adjoin_sqrt,
    cmp_with_sqrt,
    common_tower,
    least_int_above_sqrt,
    simplest_rational_between_sqrts,
    strict_rational_bounds_of_sqrt,
    _frac_sqrt,
)


class GadgetError(ValueError):
    pass


class DegenerateSegment(GadgetError):
    pass


class TOutOfRange(GadgetError):
    pass


class NotATranslate(GadgetError):
    pass


class IrrationalSide(GadgetError):
    pass


class DegenerateLinkage(GadgetError):
    pass


class NotPerpendicular(GadgetError):
    pass


class UnreachableRatio(GadgetError):
    pass


class CoincidentInputs(GadgetError):
    pass


class InvalidGadget(GadgetError):
    """Self-consistency validation failed (bad certificate, side pair, or goal)."""


# ---------------------------------------------------------------------------
# Goals
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineComb:
    """f(c) = t*f(a) + (1-t)*f(b)."""

    c: str
    a: str
    b: str
    t: Fraction


@dataclass(frozen=True)
class VecEq:
    """f(b) - f(a) = f(d) - f(c)."""

    a: str
    b: str
    c: str
    d: str


@dataclass(frozen=True)
class VecScale:
    """f(b) - f(a) = r * (f(d) - f(c))."""

    a: str
    b: str
    c: str
    d: str
    r: Fraction


@dataclass(frozen=True)
class DotZero:
    """(f(b) - f(a)) . (f(d) - f(c)) = 0."""

    a: str
    b: str
    c: str
    d: str


Goal = Union[AffineComb, VecEq, VecScale, DotZero]


def goal_holds(goal: Goal, points: Mapping[str, Point]) -> bool:
    """Evaluate a goal on concrete coordinates (identity-model truth)."""
    p = points
    if isinstance(goal, AffineComb):
        return (p[goal.c] - p[goal.b]) == (p[goal.a] - p[goal.b]).scaled(goal.t)
    if isinstance(goal, VecEq):
        return (p[goal.b] - p[goal.a]) == (p[goal.d] - p[goal.c])
    if isinstance(goal, VecScale):
        return (p[goal.b] - p[goal.a]) == (p[goal.d] - p[goal.c]).scaled(goal.r)
    if isinstance(goal, DotZero):
        return _is_zero((p[goal.b] - p[goal.a]).dot(p[goal.d] - p[goal.c]))
    raise TypeError(f"unknown goal {goal!r}")


@dataclass(frozen=True)
class CertEntry:
    p: str
    q: str
    d2: Fraction


@dataclass
class Gadget:
    """A named point configuration with its forcing data.

    Treated as immutable after construction; constructors validate before
    returning and concurrent consumers share gadgets freely.
    """

    tower: TowerDesc
    points: dict[str, Point]
    certificate: tuple[CertEntry, ...]
    side_conditions: tuple[tuple[str, str], ...]
    goal: Goal
    layout: dict

    def validate(self) -> None:
        for entry in self.certificate:
            if entry.p not in self.points or entry.q not in self.points:
                raise InvalidGadget(f"certificate references unknown point {entry.p}/{entry.q}")
            got = sqdist(self.points[entry.p], self.points[entry.q])
            if not got == entry.d2:
                raise InvalidGadget(
                    f"certificate mismatch for ({entry.p},{entry.q}): stored {entry.d2}, got {got}"
                )
        for a, b in self.side_conditions:
            if self.points[a] == self.points[b]:
                raise InvalidGadget(f"side condition {a} != {b} fails on coordinates")
        if not goal_holds(self.goal, self.points):
            raise InvalidGadget("goal fails on the gadget's own coordinates")


# ---------------------------------------------------------------------------
# Assembly: merges sub-constructions, canonicalizing names by coordinates.
# ---------------------------------------------------------------------------


class _Builder:
    def __init__(self) -> None:
        self.points: dict[str, Point] = {}
        self._bounds: dict[str, tuple] = {}
        self.certificate: dict[tuple[str, str], Fraction] = {}
        self.cert_order: list[tuple[str, str]] = []
        self.side_conditions: list[tuple[str, str]] = []

    def add_point(self, name: str, point: Point) -> str:
        # interval prefilter: exact (tower-merging) comparison only on overlap
        bounds = (point.x.bounds(12), point.y.bounds(12))
        for existing, p in self.points.items():
            eb = self._bounds[existing]
            if (
                eb[0][0] <= bounds[0][1]
                and bounds[0][0] <= eb[0][1]
                and eb[1][0] <= bounds[1][1]
                and bounds[1][0] <= eb[1][1]
                and p == point
            ):
                return existing
        if name in self.points:
            base, k = name, 2
            while f"{base}_{k}" in self.points:
                k += 1
            name = f"{base}_{k}"
        self.points[name] = point
        self._bounds[name] = bounds
        return name

    def add_cert(self, p: str, q: str, d2: Fraction) -> None:
        key = (p, q) if p <= q else (q, p)
        if key in self.certificate:
            if self.certificate[key] != d2:
                raise InvalidGadget(f"conflicting certificate values for {key}")
            return
        self.certificate[key] = d2
        self.cert_order.append(key)

    def add_side(self, p: str, q: str) -> None:
        if (p, q) not in self.side_conditions and (q, p) not in self.side_conditions:
            self.side_conditions.append((p, q))

    def finish(self, goal: Goal, layout: dict) -> Gadget:
        points, tower = _minimize_points(self.points)
        gadget = Gadget(
            tower=tower,
            points=points,
            certificate=tuple(
                CertEntry(p, q, self.certificate[(p, q)]) for p, q in self.cert_order
            ),
            side_conditions=tuple(self.side_conditions),
            goal=goal,
            layout=layout,
        )
        gadget.validate()
        return gadget


def _minimize_points(points: Mapping[str, Point]) -> tuple[dict[str, Point], TowerDesc]:
    """Unify all coordinates into one join tower, then drop unused generators.

    The join is built by folding in insertion order; a second pass maps every
    coordinate into it (all adjunctions are then absorbed), so the emitted
    gadget carries a single field descriptor.
    """
    acc = QQ.zero()
    for p in points.values():
        for coord in (p.x, p.y):
            acc, _ = common_tower(acc, coord)
    tower = acc.tower
    unified: dict[str, Point] = {}
    for name, p in points.items():
        coords = []
        for coord in (p.x, p.y):
            anchor, mapped = common_tower(tower.zero(), coord)
            if anchor.tower != tower:
                raise InvalidGadget("coordinate does not embed in the join tower")
            coords.append(mapped)
        unified[name] = Point(coords[0], coords[1])
    depth = 0
    for p in unified.values():
        for coord in (p.x, p.y):
            depth = max(depth, coord.minimized().tower.depth)
    tower = tower.prefix(depth)
    out = {
        name: Point(p.x.minimized().lift(tower), p.y.minimized().lift(tower))
        for name, p in unified.items()
    }
    return out, tower


# ---------------------------------------------------------------------------
# Exact circle intersections
# ---------------------------------------------------------------------------


def circle_intersection(p1: Point, s1, p2: Point, s2, branch: int = 1) -> Point:
    """A point at squared distance s1 from p1 and s2 from p2.

    The branch picks the sign of the component along (p2-p1) rotated by +90
    degrees.  Adjoins one square root unless the circles are tangent.
    """
    v = p2 - p1
    q = v.dot(v)
    if q.is_zero():
        raise DegenerateSegment("circle centers coincide")
    s1 = _as_scalar(s1, q.tower)
    s2 = _as_scalar(s2, q.tower)
    alpha = (s1 - s2 + q) / (2 * q)
    beta_sq = s1 / q - alpha * alpha
    sign = beta_sq.sign()
    if sign < 0:
        raise GadgetError("circles do not intersect")
    base = p1 + v.scaled(alpha)
    if sign == 0:
        return base
    res = adjoin_sqrt(beta_sq.tower, beta_sq)
    beta = res.root if branch >= 0 else -res.root
    return Point(
        base.x.lift(res.tower) - beta * v.y.lift(res.tower),
        base.y.lift(res.tower) + beta * v.x.lift(res.tower),
    )


def second_intersection_through(p1: Point, p2: Point, known: Point) -> Point:
    """The other intersection of two circles that are known to meet at ``known``:
    the reflection of ``known`` across the line of centers.  Radical-free."""
    v = p2 - p1
    q = v.dot(v)
    if q.is_zero():
        raise DegenerateSegment("circle centers coincide")
    u = known - p1
    return p1 + v.scaled((2 * u.dot(v)) / q) + (-u)


def _as_scalar(value, tower: TowerDesc) -> TowerElem:
    if isinstance(value, TowerElem):
        return value
    return tower.rational(Fraction(value))


# ---------------------------------------------------------------------------
# Division gadget (rational section of a segment)
# ---------------------------------------------------------------------------


def choose_division_radius(ab_sq: TowerElem, t: Fraction) -> Fraction:
    """Deterministic rational radius: |AB| < r, plus r < |AB|/|1-2t| for t != 1/2.

    For t = 1/2 this is the smallest integer above |AB|; otherwise the
    smallest-denominator rational in the open interval, by mediant search
    with exact tower ordering.
    """
    if t == Fraction(1, 2):
        return Fraction(least_int_above_sqrt(ab_sq, strict=True))
    bound = Fraction(1) - 2 * t
    hi_sq = ab_sq * (1 / (bound * bound))
    return simplest_rational_between_sqrts(ab_sq, hi_sq)


def _emit_division(builder: _Builder, a: Point, b: Point, t: Fraction, r: Fraction, hint: str = "") -> dict:
    """Emit the six-point division configuration; returns its layout."""
    one = Fraction(1)
    d = circle_intersection(a, ((one - t) * r) ** 2, b, (t * r) ** 2, branch=1)
    e = a + (d - a).scaled(one - t)
    f = b + (d - b).scaled(t)
    c = a + (b - a).scaled(one - t)
    names = {
        role: builder.add_point(hint + role, point)
        for role, point in zip("ABCDEF", (a, b, c, d, e, f))
    }
    base = t * (one - t) * r
    for roles, value in (
        (("A", "E"), (((one - t) ** 2) * r) ** 2),
        (("E", "D"), base**2),
        (("A", "D"), ((one - t) * r) ** 2),
        (("B", "F"), ((t**2) * r) ** 2),
        (("F", "D"), base**2),
        (("B", "D"), (t * r) ** 2),
        (("E", "C"), base**2),
        (("F", "C"), base**2),
    ):
        builder.add_cert(names[roles[0]], names[roles[1]], value)
    builder.add_side(names["E"], names["F"])
    builder.add_side(names["C"], names["D"])
    return {"kind": "division", "t": t, "r": r, "roles": names}


def build_division(a: Point, b: Point, t: Fraction, r: Fraction | None = None) -> Gadget:
    """Points and certificate forcing f(C) = t f(A) + (1-t) f(B) for C = tA+(1-t)B."""
    t = Fraction(t)
    if not 0 < t < 1:
        raise TOutOfRange(f"t = {t} is not in (0, 1)")
    if a == b:
        raise DegenerateSegment("A = B")
    ab_sq = sqdist(a, b)
    if r is None:
        r = choose_division_radius(ab_sq, t)
    else:
        r = Fraction(r)
        if cmp_with_sqrt(r, ab_sq) <= 0:
            raise GadgetError(f"r = {r} does not exceed |AB|")
        if t != Fraction(1, 2) and cmp_with_sqrt(r * abs(1 - 2 * t), ab_sq) >= 0:
            raise GadgetError(f"r = {r} is too large for t = {t}")
    builder = _Builder()
    layout = _emit_division(builder, a, b, t, r)
    roles = layout["roles"]
    goal = AffineComb(c=roles["C"], a=roles["A"], b=roles["B"], t=t)
    return builder.finish(goal, layout)


# ---------------------------------------------------------------------------
# Rhombus chains and the translation bridge
# ---------------------------------------------------------------------------


def _chain_steps(v: Vec2, w: Vec2, s: Fraction) -> list[Vec2]:
    """Step vectors of length s summing to v, none equal to +-w.

    The translation splits into equal collinear chunks of length at most 2s,
    each realized as two steps v_c/2 +- h*n; the +- sign alternates per chunk
    and flips globally if a step would coincide with a diagonal direction.
    If a decomposition still collides, the chunk count is increased.
    """
    q_v = v.dot(v)
    s_sq = QQ.rational(s * s)
    k0 = max(1, least_int_above_sqrt(q_v / (4 * s * s), strict=False))
    for k in range(k0, k0 + 12):
        chunk = v.scaled(Fraction(1, k))
        q_c = chunk.dot(chunk)
        beta_sq = (s_sq - q_c * Fraction(1, 4)) / q_c
        if beta_sq.sign() < 0:
            continue
        half = chunk.scaled(Fraction(1, 2))
        if beta_sq.is_zero():
            candidates = [[half] * (2 * k)]
        else:
            res = adjoin_sqrt(beta_sq.tower, beta_sq)
            delta = Vec2(-chunk.y, chunk.x).scaled(res.root)
            candidates = []
            for sigma0 in (1, -1):
                steps: list[Vec2] = []
                for j in range(k):
                    d = delta if sigma0 * (-1) ** j > 0 else -delta
                    steps.append(half + d)
                    steps.append(half - d)
                candidates.append(steps)
        for steps in candidates:
            if all(not step == w and not step == -w for step in steps):
                return steps
    raise GadgetError("no admissible rhombus chain decomposition found")


def _emit_chain(builder: _Builder, a: Point, b: Point, c: Point, d: Point, prefix1: str, prefix2: str) -> dict:
    """Emit one rhombus chain transporting (a -> b) onto (c -> d); returns layout."""
    v = b - a
    if not (d - c) == v:
        raise NotATranslate("D - C differs from B - A")
    w = c - a
    if v.is_zero():
        n_a = builder.add_point(f"{prefix1}0", a)
        n_c = builder.add_point(f"{prefix2}0", c)
        return {"kind": "chain", "track1": [n_a], "track2": [n_c], "side_sq": None}
    if w.is_zero():
        n_a = builder.add_point(f"{prefix1}0", a)
        n_b = builder.add_point(f"{prefix1}1", b)
        return {"kind": "chain", "track1": [n_a, n_b], "track2": [n_a, n_b], "side_sq": None}
    w2 = w.dot(w)
    if not w2.is_rational():
        raise IrrationalSide(f"|AC|^2 = {w2} is not rational")
    s = _frac_sqrt(w2.as_fraction())
    if s is None:
        raise IrrationalSide(f"|AC|^2 = {w2.as_fraction()} is not the square of a rational")
    steps = _chain_steps(v, w, s)
    s2 = s * s
    track1 = [builder.add_point(f"{prefix1}0", a)]
    track2 = [builder.add_point(f"{prefix2}0", c)]
    current = a
    for i, step in enumerate(steps, start=1):
        current = current + step
        track1.append(builder.add_point(f"{prefix1}{i}", current))
        track2.append(builder.add_point(f"{prefix2}{i}", current + w))
    for i in range(len(track1)):
        builder.add_cert(track1[i], track2[i], s2)
        if i + 1 < len(track1):
            builder.add_cert(track1[i], track1[i + 1], s2)
            builder.add_cert(track2[i], track2[i + 1], s2)
    for i in range(len(track1) - 1):
        builder.add_side(track1[i], track2[i + 1])
        builder.add_side(track2[i], track1[i + 1])
    return {"kind": "chain", "track1": track1, "track2": track2, "side_sq": s2}


def build_rhombus_chain(a: Point, b: Point, c: Point, d: Point) -> Gadget:
    """Transport f(B)-f(A) = f(D)-f(C) along congruent rhombi with rational side;
    degenerate translations yield the trivial chain."""
    builder = _Builder()
    layout = _emit_chain(builder, a, b, c, d, "A", "C")
    goal = VecEq(
        a=layout["track1"][0],
        b=layout["track1"][-1],
        c=layout["track2"][0],
        d=layout["track2"][-1],
    )
    return builder.finish(goal, layout)


def _emit_bridge(builder: _Builder, a: Point, b: Point, c: Point, d: Point, prefix: str) -> dict:
    """Emit a translation bridge for arbitrary |AC|; returns layout."""
    v = b - a
    if not (d - c) == v:
        raise NotATranslate("D - C differs from B - A")
    w = c - a
    direct = v.is_zero() or w.is_zero()
    if not direct:
        w2 = w.dot(w)
        direct = w2.is_rational() and _frac_sqrt(w2.as_fraction()) is not None
    if direct:
        sub = _emit_chain(builder, a, b, c, d, f"{prefix}A", f"{prefix}C")
        return {"kind": "bridge", "sub": [sub]}
    q = Fraction(least_int_above_sqrt(w.dot(w), strict=False))
    e = circle_intersection(a, q * q, c, q * q, branch=1)
    f = e + v
    sub1 = _emit_chain(builder, a, b, e, f, f"{prefix}A", f"{prefix}E")
    sub2 = _emit_chain(builder, e, f, c, d, f"{prefix}G", f"{prefix}C")
    return {"kind": "bridge", "sub": [sub1, sub2]}


def build_translation_bridge(a: Point, b: Point, c: Point, d: Point) -> Gadget:
    """Transport f(B)-f(A) = f(D)-f(C) for an arbitrary translate pair, inserting
    auxiliary points at rational distances when |AC| is irrational."""
    builder = _Builder()
    layout = _emit_bridge(builder, a, b, c, d, "")
    first = layout["sub"][0]
    last = layout["sub"][-1]
    goal = VecEq(
        a=first["track1"][0],
        b=first["track1"][-1],
        c=last["track2"][0],
        d=last["track2"][-1],
    )
    return builder.finish(goal, layout)


# ---------------------------------------------------------------------------
# Kempe linkage
# ---------------------------------------------------------------------------

KEMPE_SQ_DISTANCES: dict[tuple[str, str], Fraction] = {
    ("A", "B"): Fraction(16),
    ("A", "D"): Fraction(16),
    ("C", "B"): Fraction(4),
    ("C", "D"): Fraction(4),
    ("C", "E"): Fraction(4),
    ("A", "F"): Fraction(9),
    ("F", "B"): Fraction(1),
    ("F", "E"): Fraction(1),
}


def _kempe_points(t: TowerElem) -> dict[str, Point]:
    """The six linkage points for circle parameter t; exact in t's field."""
    tower = t.tower
    one = tower.one()
    t2 = t * t
    denom = (one + t2).inverse()
    cos = (one - t2) * denom
    sin = (2 * t) * denom
    a = Point(tower.rational(0), tower.rational(0))
    b = Point(tower.rational(4), tower.rational(0))
    f = Point(tower.rational(3), tower.rational(0))
    c = Point(b.x + 2 * cos, b.y + 2 * sin)
    d = second_intersection_through(a, c, b)
    e = second_intersection_through(c, f, b)
    return {"A": a, "B": b, "C": c, "D": d, "E": e, "F": f}


def _emit_kempe(builder: _Builder, t, rotation: tuple | None = None, anchor: Point | None = None) -> dict:
    t_elem = QQ.rational(Fraction(t)) if isinstance(t, (int, Fraction)) else t
    if t_elem.is_zero():
        raise DegenerateLinkage("t = 0 makes circle(A,4) tangent to circle(C,2) at B")
    pts = _kempe_points(t_elem)
    if rotation is not None or anchor is not None:
        cos0, sin0 = rotation if rotation is not None else (QQ.rational(1), QQ.rational(0))
        origin = anchor if anchor is not None else Point(QQ.rational(0), QQ.rational(0))
        pts = {
            name: Point(
                origin.x + cos0 * p.x - sin0 * p.y,
                origin.y + sin0 * p.x + cos0 * p.y,
            )
            for name, p in pts.items()
        }
    if pts["D"] == pts["B"]:
        raise DegenerateLinkage("circle(A,4) is tangent to circle(C,2): D = B")
    if pts["E"] == pts["B"]:
        raise DegenerateLinkage("circle(C,2) is tangent to circle(F,1): E = B")
    names = {role: builder.add_point(role, p) for role, p in pts.items()}
    for (p_role, q_role), value in KEMPE_SQ_DISTANCES.items():
        builder.add_cert(names[p_role], names[q_role], value)
    builder.add_side(names["B"], names["D"])
    builder.add_side(names["B"], names["E"])
    return {
        "kind": "kempe",
        "t": t_elem.as_fraction() if t_elem.is_rational() else t_elem,
        "roles": names,
    }


def build_kempe(t) -> Gadget:
    """The linkage fragment with distances 1,2,3,4 forcing DE perpendicular to AB."""
    builder = _Builder()
    layout = _emit_kempe(builder, t)
    roles = layout["roles"]
    goal = DotZero(a=roles["D"], b=roles["E"], c=roles["A"], d=roles["B"])
    return builder.finish(goal, layout)


def kempe_de_length(t: Fraction) -> Fraction:
    """|DE| of the rational-parameter linkage: 24t/(t^2+9) for t > 0."""
    t = Fraction(t)
    return 24 * t / (t * t + 9)


# ---------------------------------------------------------------------------
# Perpendicularity transfer
# ---------------------------------------------------------------------------


def _emit_scale(builder: _Builder, src: tuple[str, str], dst: tuple[str, str], r: Fraction, prefix: str) -> dict:
    """Emit auxiliary structure certifying f(dst1)-f(dst0) = r*(f(src1)-f(src0)).

    Requires the domain relation dst1 - dst0 = r*(src1 - src0).  Composes a
    translation bridge with a division gadget; negative ratios reflect through
    a midpoint, ratios above one divide the translated unit instead.
    """
    a_name, b_name = src
    c_name, d_name = dst
    pa, pb = builder.points[a_name], builder.points[b_name]
    pc, pd = builder.points[c_name], builder.points[d_name]
    v = pb - pa
    if not (pd - pc) == v.scaled(r):
        raise GadgetError("scale relation does not hold on domain coordinates")
    layout: dict = {
        "kind": "scale",
        "src": [a_name, b_name],
        "dst": [c_name, d_name],
        "r": r,
        "sub": [],
    }
    if r == 0 or v.is_zero():
        return layout
    if r == 1:
        layout["sub"].append(_emit_bridge(builder, pa, pb, pc, pd, prefix))
        return layout
    if r > 0:
        translated = pc + v
        t_name = builder.add_point(f"{prefix}T", translated)
        layout["translated"] = t_name
        layout["sub"].append(_emit_bridge(builder, pa, pb, pc, translated, prefix))
        if r < 1:
            radius = choose_division_radius(sqdist(translated, pc), r)
            layout["sub"].append(_emit_division(builder, translated, pc, r, radius, hint=f"{prefix}d"))
        else:
            t_inv = 1 / r
            radius = choose_division_radius(sqdist(pd, pc), t_inv)
            layout["sub"].append(_emit_division(builder, pd, pc, t_inv, radius, hint=f"{prefix}d"))
        return layout
    # r < 0: realize U = C + |r|v, then C is the midpoint of D and U.
    mirrored = pc + v.scaled(-r)
    u_name = builder.add_point(f"{prefix}U", mirrored)
    layout["mirror"] = u_name
    layout["sub"].append(_emit_scale(builder, src, (c_name, u_name), -r, prefix + "m"))
    half = Fraction(1, 2)
    radius = choose_division_radius(sqdist(pd, mirrored), half)
    layout["sub"].append(_emit_division(builder, pd, mirrored, half, radius, hint=f"{prefix}d"))
    return layout


def simplest_rational_in_interval(lo: TowerElem, hi: TowerElem) -> Fraction:
    """Smallest-denominator rational strictly between two tower values."""
    if (hi - lo).sign() <= 0:
        raise ValueError("empty interval")
    a, b = 0, 1
    c, d = 1, 0
    while True:
        m = Fraction(a + c, b + d)
        if (lo - m).sign() >= 0:
            a, b = m.numerator, m.denominator
        elif (hi - m).sign() <= 0:
            c, d = m.numerator, m.denominator
        else:
            return m


# candidate linkage parameters for the bounded rational search
KEMPE_PARAM_CANDIDATES: tuple[Fraction, ...] = (
    Fraction(1),
    Fraction(1, 2),
    Fraction(2),
    Fraction(3, 4),
    Fraction(1, 3),
    Fraction(3),
)


def _solve_kempe_parameter(kappa: TowerElem) -> tuple:
    """Linkage parameter t and rational r with kappa = r * |DE(t)| exactly.

    A rational component uses the first admissible rational parameter; an
    irrational one solves 24t/(t^2+9) = |kappa|/r for t, which is a quadratic,
    after choosing r so the target length lands strictly inside (0, 4).
    """
    if kappa.is_rational():
        kappa_f = kappa.as_fraction()
        for cand in KEMPE_PARAM_CANDIDATES:
            de = kempe_de_length(cand)
            if de != 0:
                return QQ.rational(cand), kappa_f / de
        raise UnreachableRatio("no rational linkage parameter available")
    sign = kappa.sign()
    mag = kappa if sign > 0 else -kappa
    r_mag = simplest_rational_in_interval(mag * Fraction(1, 4), mag * Fraction(1, 2))
    target = mag * (1 / r_mag)  # |DE| target, strictly inside (2, 4)
    disc = 144 - 9 * target * target
    res = adjoin_sqrt(disc.tower, disc)
    root = res.root
    target_l = target.lift(res.tower)
    for branch in (-1, 1):
        t_param = (res.tower.rational(12) + branch * root) / target_l
        if t_param.minimized().tower.depth > 3:
            continue
        linkage = _kempe_points(t_param)
        if linkage["D"] == linkage["B"] or linkage["E"] == linkage["B"]:
            continue
        return t_param, (r_mag if sign > 0 else -r_mag)
    raise UnreachableRatio("parameter solve exceeds supported radical nesting")


def build_perp_transfer(p: Point, q: Point, x: Point, y: Point) -> Gadget:
    """A rotated Kempe linkage plus ratio transfers witnessing that
    f(Q)-f(P) stays perpendicular to f(Y)-f(X)."""
    vpq = q - p
    vxy = y - x
    if vpq.is_zero() or vxy.is_zero():
        raise CoincidentInputs("P = Q or X = Y")
    if not _is_zero(vpq.dot(vxy)):
        raise NotPerpendicular("PQ is not perpendicular to XY")
    qxy = vxy.dot(vxy)
    s_xy = _frac_sqrt(qxy.as_fraction()) if qxy.is_rational() else None
    if s_xy is None:
        raise UnreachableRatio("|XY| must be rational to anchor the linkage")
    inv = 1 / s_xy
    cos0 = vxy.x * inv
    sin0 = vxy.y * inv
    # PQ = kappa * (the unit DE direction after rotation)
    kappa = -vpq.x * sin0 + vpq.y * cos0
    t_param, r = _solve_kempe_parameter(kappa)
    builder = _Builder()
    p_name = builder.add_point("P", p)
    q_name = builder.add_point("Q", q)
    x_name = builder.add_point("X", x)
    y_name = builder.add_point("Y", y)
    layout_kempe = _emit_kempe(builder, t_param, rotation=(cos0, sin0), anchor=p)
    roles = layout_kempe["roles"]
    s = s_xy / 4
    scale_pq = _emit_scale(builder, (roles["E"], roles["D"]), (p_name, q_name), r, "p")
    scale_xy = _emit_scale(builder, (roles["A"], roles["B"]), (x_name, y_name), s, "x")
    goal = DotZero(a=p_name, b=q_name, c=x_name, d=y_name)
    layout = {
        "kind": "perp",
        "kempe": layout_kempe,
        "scale_pq": scale_pq,
        "scale_xy": scale_xy,
        "r": r,
        "s": s,
    }
    return builder.finish(goal, layout)


# ---------------------------------------------------------------------------
# Witness points for the injectivity / nonzero-distance axioms
# ---------------------------------------------------------------------------


def find_rational_bidistance_point(p1: Point, p2: Point, mode: str = "distinct_distances") -> tuple[Point, Fraction, Fraction]:
    """A point at exactly-rational distances (q1, q2) from two given points.

    ``equal_distances`` returns q1 = q2 > |P1P2|/2; ``distinct_distances``
    returns q1 != q2 with |q1 - q2| < |P1P2| < q1 + q2.
    """
    if p1 == p2:
        raise CoincidentInputs("P1 = P2")
    if mode not in ("distinct_distances", "equal_distances"):
        raise ValueError(f"unknown mode {mode!r}")
    d_sq = sqdist(p1, p2)
    if mode == "equal_distances":
        q = Fraction(least_int_above_sqrt(d_sq * Fraction(1, 4), strict=True))
        w = circle_intersection(p1, q * q, p2, q * q, branch=1)
        return w, q, q
    lo, hi = strict_rational_bounds_of_sqrt(d_sq)
    w = circle_intersection(p1, hi * hi, p2, lo * lo, branch=1)
    return w, hi, lo
