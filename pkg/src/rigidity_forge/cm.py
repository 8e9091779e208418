"""Cayley-Menger determinants and the coordinate-level vector lemmas.

``cm3``/``cm4`` take squared distances directly, so one code path serves
numeric carriers, the symbolic polynomial ring, and image-space checks.
Point-based wrappers compute the squared-distance form first.  All
precondition checks are exact; nothing here tolerates approximation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .scalars import QQ, TowerDesc, TowerElem

Scalar = Any  # Fraction | TowerElem | FunElem | Polynomial | int


class PreconditionViolated(ValueError):
    """A lemma's hypotheses fail on the given exact data."""


class DegenerateSum(PreconditionViolated):
    """The division ratio a/(a+b) does not exist because a + b = 0."""


def _is_zero(x: Scalar) -> bool:
    z = getattr(x, "is_zero", None)
    if z is not None:
        return z()
    return x == 0


@dataclass(frozen=True)
class Point:
    """A point of F^2; both coordinates must come from one field carrier."""

    x: Scalar
    y: Scalar

    def __sub__(self, other: "Point") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __add__(self, other: "Vec2") -> "Point":
        return Point(self.x + other.x, self.y + other.y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Point):
            return NotImplemented
        return _is_zero(self.x - other.x) and _is_zero(self.y - other.y)

    def __hash__(self) -> int:
        return hash((self.x, self.y))


@dataclass(frozen=True)
class Vec2:
    x: Scalar
    y: Scalar

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def scaled(self, factor: Scalar) -> "Vec2":
        return Vec2(factor * self.x, factor * self.y)

    def dot(self, other: "Vec2") -> Scalar:
        return self.x * other.x + self.y * other.y

    def cross(self, other: "Vec2") -> Scalar:
        return self.x * other.y - self.y * other.x

    def is_zero(self) -> bool:
        return _is_zero(self.x) and _is_zero(self.y)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Vec2):
            return NotImplemented
        return (self - other).is_zero()

    def __hash__(self) -> int:
        return hash((self.x, self.y))


def rational_point(x, y, tower: TowerDesc = QQ) -> Point:
    return Point(tower.rational(Fraction(x)), tower.rational(Fraction(y)))


def sqdist(p: Point, q: Point) -> Scalar:
    """The squared-distance form (x1-y1)^2 + (x2-y2)^2 over any carrier."""
    dx = p.x - q.x
    dy = p.y - q.y
    return dx * dx + dy * dy


def _det(rows: Sequence[Sequence[Scalar]]) -> Scalar:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    total = None
    for j in range(n):
        entry = rows[0][j]
        if isinstance(entry, int) and entry == 0:
            continue
        minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
        term = entry * _det(minor)
        signed = term if j % 2 == 0 else -term
        total = signed if total is None else total + signed
    return 0 if total is None else total


def cm3(d12: Scalar, d13: Scalar, d23: Scalar) -> Scalar:
    """Bordered determinant for three points from their squared distances."""
    return _det(
        [
            [0, 1, 1, 1],
            [1, 0, d12, d13],
            [1, d12, 0, d23],
            [1, d13, d23, 0],
        ]
    )


def cm4(d12: Scalar, d13: Scalar, d14: Scalar, d23: Scalar, d24: Scalar, d34: Scalar) -> Scalar:
    """Bordered determinant for four points from their squared distances."""
    return _det(
        [
            [0, 1, 1, 1, 1],
            [1, 0, d12, d13, d14],
            [1, d12, 0, d23, d24],
            [1, d13, d23, 0, d34],
            [1, d14, d24, d34, 0],
        ]
    )


def cm3_points(p1: Point, p2: Point, p3: Point) -> Scalar:
    return cm3(sqdist(p1, p2), sqdist(p1, p3), sqdist(p2, p3))


def cm4_points(p1: Point, p2: Point, p3: Point, p4: Point) -> Scalar:
    return cm4(
        sqdist(p1, p2),
        sqdist(p1, p3),
        sqdist(p1, p4),
        sqdist(p2, p3),
        sqdist(p2, p4),
        sqdist(p3, p4),
    )


def affinely_dependent3(p1: Point, p2: Point, p3: Point) -> bool:
    """Three points are affinely dependent iff their bordered determinant vanishes."""
    return _is_zero(cm3_points(p1, p2, p3))


@dataclass(frozen=True)
class RatioCertificate:
    """Witness that x - z = ratio * (xt - z), checked coordinatewise."""

    ratio: Scalar
    lhs: Vec2
    rhs: Vec2


def prop3_verify(z: Point, x: Point, xt: Point, a: Scalar, b: Scalar) -> RatioCertificate:
    """Certify the division ratio forced by the a^2 / b^2 / (a+b)^2 pattern."""
    s = a + b
    if _is_zero(s):
        raise DegenerateSum("a + b = 0")
    checks = (
        (sqdist(z, x), a * a, "phi2(z,x) != a^2"),
        (sqdist(x, xt), b * b, "phi2(x,xt) != b^2"),
        (sqdist(z, xt), s * s, "phi2(z,xt) != (a+b)^2"),
    )
    for got, want, message in checks:
        if not _is_zero(got - want):
            raise PreconditionViolated(message)
    ratio = a * _invert(s)
    lhs = x - z
    rhs = xt - z
    if not (rhs.scaled(ratio) == lhs):
        raise PreconditionViolated("coordinate certificate failed")
    return RatioCertificate(ratio=ratio, lhs=lhs, rhs=rhs)


@dataclass(frozen=True)
class ParallelogramCertificate:
    """Witness vectors for C - E = F - D and C - F = E - D."""

    ec: Vec2
    fc: Vec2


def prop4_verify(e: Point, f: Point, c: Point, d: Point) -> ParallelogramCertificate:
    """Certify the reflected-pair conclusion for four points at equal distances."""
    if _is_zero(sqdist(e, f)):
        raise PreconditionViolated("phi2(E,F) = 0")
    if c == d:
        raise PreconditionViolated("C = D")
    base = sqdist(e, c)
    for got, message in (
        (sqdist(f, c), "phi2(F,C) differs from phi2(E,C)"),
        (sqdist(e, d), "phi2(E,D) differs from phi2(E,C)"),
        (sqdist(f, d), "phi2(F,D) differs from phi2(E,C)"),
    ):
        if not _is_zero(got - base):
            raise PreconditionViolated(message)
    ec = c - e
    fc = c - f
    if not (ec == f - d):
        raise PreconditionViolated("coordinate certificate failed: C-E != F-D")
    if not (fc == e - d):
        raise PreconditionViolated("coordinate certificate failed: C-F != E-D")
    return ParallelogramCertificate(ec=ec, fc=fc)


def _invert(x: Scalar) -> Scalar:
    inv = getattr(x, "inverse", None)
    if inv is not None:
        return inv()
    return 1 / Fraction(x)
