"""Multivariate polynomials over Q with exact determinants.

Terms map exponent vectors (over a fixed, named indeterminate context) to
nonzero rational coefficients; graded-lexicographic order gives the canonical
rendering.  Determinants come from fraction-free (Bareiss) elimination with a
cofactor expansion kept as an independent oracle.  There is deliberately no
factoring: identities are checked by expanding a claimed factored form.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .scalars import RationalLike, _as_fraction

Exponents = tuple[int, ...]


class Polynomial:
    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Mapping[Exponents, Fraction] | None = None) -> None:
        object.__setattr__(self, "vars", tuple(vars))
        clean: dict[Exponents, Fraction] = {}
        if terms:
            for exps, coeff in terms.items():
                coeff = _as_fraction(coeff)
                if coeff != 0:
                    clean[tuple(exps)] = coeff
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("Polynomial is immutable")

    # -- constructors -----------------------------------------------------------

    @staticmethod
    def constant(value: RationalLike, vars: Sequence[str]) -> "Polynomial":
        vars = tuple(vars)
        return Polynomial(vars, {(0,) * len(vars): _as_fraction(value)})

    @staticmethod
    def variable(name: str, vars: Sequence[str]) -> "Polynomial":
        vars = tuple(vars)
        exps = [0] * len(vars)
        exps[vars.index(name)] = 1
        return Polynomial(vars, {tuple(exps): Fraction(1)})

    def _coerce(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            if other.vars != self.vars:
                raise ValueError("polynomials use different indeterminate contexts")
            return other
        if isinstance(other, (int, Fraction)):
            return Polynomial.constant(other, self.vars)
        return None

    # -- structure ---------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(all(e == 0 for e in exps) for exps in self.terms)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if not self.is_constant():
            raise ValueError("not a constant polynomial")
        return next(iter(self.terms.values()))

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    # -- arithmetic -----------------------------------------------------------------

    def __add__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out = dict(self.terms)
        for exps, coeff in rhs.terms.items():
            out[exps] = out.get(exps, Fraction(0)) + coeff
        return Polynomial(self.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other):
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out: dict[Exponents, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in rhs.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return Polynomial(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Polynomial.constant(1, self.vars)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self.terms == rhs.terms

    def __hash__(self) -> int:
        return hash((self.vars, frozenset(self.terms.items())))

    # -- substitution and evaluation -------------------------------------------------

    def substitute(self, bindings: Mapping[str, Union["Polynomial", RationalLike]]) -> "Polynomial":
        """Exact substitution of polynomials or rationals for indeterminates."""
        subs: dict[int, Polynomial] = {}
        for name, value in bindings.items():
            if name not in self.vars:
                raise ValueError(f"unknown indeterminate {name!r}")
            if isinstance(value, (int, Fraction)):
                value = Polynomial.constant(value, self.vars)
            elif value.vars != self.vars:
                raise ValueError("binding uses a different indeterminate context")
            subs[self.vars.index(name)] = value
        total = Polynomial(self.vars)
        for exps, coeff in self.terms.items():
            term = Polynomial.constant(coeff, self.vars)
            residual = list(exps)
            for idx, value in subs.items():
                if exps[idx]:
                    term = term * value ** exps[idx]
                    residual[idx] = 0
            term = term * Polynomial(self.vars, {tuple(residual): Fraction(1)})
            total = total + term
        return total

    def evaluate(self, values: Mapping[str, RationalLike]) -> Fraction:
        missing = [v for v in self.vars if v not in values and any(e[self.vars.index(v)] for e in self.terms)]
        if missing:
            raise ValueError(f"no value for indeterminates {missing}")
        total = Fraction(0)
        for exps, coeff in self.terms.items():
            acc = coeff
            for name, e in zip(self.vars, exps):
                if e:
                    acc *= _as_fraction(values[name]) ** e
            total += acc
        return total

    # -- rendering --------------------------------------------------------------------

    def _grlex_key(self, exps: Exponents):
        return (sum(exps), exps)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps in sorted(self.terms, key=self._grlex_key, reverse=True):
            coeff = self.terms[exps]
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.vars, exps)
                if e
            ]
            body = "*".join(factors)
            if not body:
                parts.append(str(coeff))
            elif coeff == 1:
                parts.append(body)
            elif coeff == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{coeff}*{body}")
        out = " + ".join(parts)
        return out.replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Polynomial({self})"


def variables(names: str | Sequence[str]) -> tuple[Polynomial, ...]:
    """Declare an indeterminate context: ``e, c = variables("e c")``."""
    if isinstance(names, str):
        names = names.split()
    ctx = tuple(names)
    return tuple(Polynomial.variable(n, ctx) for n in ctx)


PolyLike = Union[Polynomial, int, Fraction]
Matrix = Sequence[Sequence[PolyLike]]


def _normalize_matrix(matrix: Matrix) -> list[list[Polynomial]]:
    ctx: tuple[str, ...] | None = None
    for row in matrix:
        for entry in row:
            if isinstance(entry, Polynomial):
                if ctx is None:
                    ctx = entry.vars
                elif entry.vars != ctx:
                    raise ValueError("matrix entries use different indeterminate contexts")
    if ctx is None:
        ctx = ()
    out = []
    for row in matrix:
        out.append(
            [e if isinstance(e, Polynomial) else Polynomial.constant(e, ctx) for e in row]
        )
    if any(len(row) != len(out) for row in out):
        raise ValueError("determinant needs a square matrix")
    return out


def divide_exact(p: Polynomial, q: Polynomial) -> Polynomial:
    """Quotient p/q when the division is exact; used by Bareiss elimination."""
    if q.is_zero():
        raise ZeroDivisionError("exact division by the zero polynomial")
    ctx = p.vars

    def grlex_lead(poly: Polynomial) -> Exponents:
        return max(poly.terms, key=lambda e: (sum(e), e))

    quotient = Polynomial(ctx)
    rem = p
    q_lead = grlex_lead(q)
    q_lc = q.terms[q_lead]
    while not rem.is_zero():
        r_lead = grlex_lead(rem)
        diff = tuple(a - b for a, b in zip(r_lead, q_lead))
        if any(d < 0 for d in diff):
            raise ArithmeticError("division is not exact")
        mono = Polynomial(ctx, {diff: rem.terms[r_lead] / q_lc})
        quotient = quotient + mono
        rem = rem - mono * q
    return quotient


def det_bareiss(matrix: Matrix) -> Polynomial:
    """Fraction-free elimination; every intermediate division is exact."""
    m = _normalize_matrix(matrix)
    n = len(m)
    ctx = m[0][0].vars if n else ()
    sign = 1
    prev = Polynomial.constant(1, ctx)
    for k in range(n - 1):
        if m[k][k].is_zero():
            for i in range(k + 1, n):
                if not m[i][k].is_zero():
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return Polynomial(ctx)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = divide_exact(m[i][j] * m[k][k] - m[i][k] * m[k][j], prev)
            m[i][k] = Polynomial(ctx)
        prev = m[k][k]
    result = m[n - 1][n - 1]
    return -result if sign < 0 else result


def det_cofactor(matrix: Matrix) -> Polynomial:
    """Laplace expansion along the first row; oracle for det_bareiss."""
    m = _normalize_matrix(matrix)
    ctx = m[0][0].vars if m else ()

    def rec(rows: list[list[Polynomial]]) -> Polynomial:
        n = len(rows)
        if n == 1:
            return rows[0][0]
        total = Polynomial(ctx)
        for j in range(n):
            if rows[0][j].is_zero():
                continue
            minor = [row[:j] + row[j + 1 :] for row in rows[1:]]
            term = rows[0][j] * rec(minor)
            total = total + term if j % 2 == 0 else total - term
        return total

    return rec(m)


def det(matrix: Matrix) -> Polynomial:
    return det_bareiss(matrix)


def identity_check(lhs: Polynomial, constant: RationalLike, factors: Iterable[Polynomial | tuple[Polynomial, int]]) -> bool:
    """True iff lhs equals constant * product(factors) after exact expansion."""
    product = Polynomial.constant(constant, lhs.vars)
    for factor in factors:
        if isinstance(factor, tuple):
            base, power = factor
            product = product * base**power
        else:
            product = product * factor
    return lhs == product
