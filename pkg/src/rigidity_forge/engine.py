"""Image-space fact store and deduction rules.

A derivation replays one of the finite rigidity proofs as an ordered list of
facts about an arbitrary unit-distance preserving map f, each justified by a
rule: the rational-distance axiom seeds certified squared distances, the
injectivity and nonzero-distance axioms seed distinctness, the two vector
lemmas fire on matching distance patterns, and linear closing steps are
validated by exact rational span membership (a conclusion is admitted only if
its formal linear relation lies in the span of its premises' relations, which
holds in F^2 for any assignment of the image points).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Mapping, Sequence, Union

from . import poly
from .cm import Point, prop3_verify, prop4_verify, sqdist, _is_zero
from .gadgets import (
    AffineComb,
    DotZero,
    Gadget,
    InvalidGadget,
    VecEq,
    VecScale,
)
from .scalars import _frac_sqrt


class EngineError(ValueError):
    pass


class InconsistentCertificate(EngineError):
    pass


class PatternMismatch(EngineError):
    pass


class NonRationalPattern(PatternMismatch):
    pass


class ReplayFailed(EngineError):
    pass


class SoundnessCertificateMissing(EngineError):
    pass


class NotAScalarMultiple(EngineError):
    pass


class NotParallel(EngineError):
    pass


class ModelUndefinedAtPoint(EngineError):
    pass


# ---------------------------------------------------------------------------
# Facts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SqDistKnown:
    p: str
    q: str
    v: Fraction


@dataclass(frozen=True)
class Distinct:
    p: str
    q: str


@dataclass(frozen=True)
class NonzeroDist:
    p: str
    q: str


Fact = Union[SqDistKnown, Distinct, NonzeroDist, VecEq, VecScale, AffineComb, DotZero]

RULES = (
    "RationalDistanceAxiom",
    "Injectivity",
    "NonzeroDistance",
    "Prop3",
    "Prop4",
    "VecAlgebra",
    "KempeChain",
    "Composition",
)


def fact_key(fact: Fact):
    """Structural key identifying a fact up to its symmetries."""
    if isinstance(fact, (SqDistKnown,)):
        p, q = sorted((fact.p, fact.q))
        return ("sqdist", p, q, fact.v)
    if isinstance(fact, (Distinct, NonzeroDist)):
        p, q = sorted((fact.p, fact.q))
        return (type(fact).__name__.lower(), p, q)
    if isinstance(fact, VecEq):
        forms = [
            (fact.a, fact.b, fact.c, fact.d),
            (fact.c, fact.d, fact.a, fact.b),
            (fact.b, fact.a, fact.d, fact.c),
            (fact.d, fact.c, fact.b, fact.a),
        ]
        return ("veceq",) + min(forms)
    if isinstance(fact, VecScale):
        forms = [
            (fact.a, fact.b, fact.c, fact.d),
            (fact.b, fact.a, fact.d, fact.c),
        ]
        return ("vecscale",) + min(forms) + (fact.r,)
    if isinstance(fact, AffineComb):
        forms = [(fact.a, fact.b, fact.t), (fact.b, fact.a, 1 - fact.t)]
        a, b, t = min(forms)
        return ("affine", fact.c, a, b, t)
    if isinstance(fact, DotZero):
        forms = []
        for u in ((fact.a, fact.b), (fact.b, fact.a)):
            for w in ((fact.c, fact.d), (fact.d, fact.c)):
                forms.append(u + w)
                forms.append(w + u)
        return ("dotzero",) + min(forms)
    raise TypeError(f"unknown fact {fact!r}")


def _linear_relation(fact: Fact) -> dict[str, Fraction] | None:
    """The formal linear relation a vector fact imposes on the image points."""
    out: dict[str, Fraction] = {}

    def bump(name: str, value: Fraction) -> None:
        out[name] = out.get(name, Fraction(0)) + value
        if out[name] == 0:
            del out[name]

    if isinstance(fact, VecEq):
        bump(fact.b, Fraction(1))
        bump(fact.a, Fraction(-1))
        bump(fact.d, Fraction(-1))
        bump(fact.c, Fraction(1))
        return out
    if isinstance(fact, VecScale):
        bump(fact.b, Fraction(1))
        bump(fact.a, Fraction(-1))
        bump(fact.d, -fact.r)
        bump(fact.c, fact.r)
        return out
    if isinstance(fact, AffineComb):
        bump(fact.c, Fraction(1))
        bump(fact.a, -fact.t)
        bump(fact.b, fact.t - 1)
        return out
    return None


def _in_span(target: dict[str, Fraction], premises: Sequence[dict[str, Fraction]]) -> bool:
    """Exact Gaussian elimination over Q on sparse name-indexed vectors."""
    basis: list[tuple[str, dict[str, Fraction]]] = []

    def reduce(vec: dict[str, Fraction]) -> dict[str, Fraction]:
        vec = dict(vec)
        for pivot, bvec in basis:
            if pivot in vec:
                factor = vec[pivot] / bvec[pivot]
                for name, value in bvec.items():
                    vec[name] = vec.get(name, Fraction(0)) - factor * value
                    if vec[name] == 0:
                        del vec[name]
        return vec

    for premise in premises:
        reduced = reduce(premise)
        if reduced:
            basis.append((next(iter(sorted(reduced))), reduced))
    return not reduce(target)


@dataclass(frozen=True)
class Justification:
    rule: str
    premises: tuple[int, ...] = ()


@dataclass
class Derivation:
    """Ordered, acyclic fact list replaying one proof; ends in the gadget goal."""

    gadget: Gadget
    facts: list[Fact] = field(default_factory=list)
    justifications: list[Justification] = field(default_factory=list)

    def final_fact(self) -> Fact:
        return self.facts[-1]

    def check_wellformed(self) -> None:
        for i, just in enumerate(self.justifications):
            if just.rule not in RULES:
                raise EngineError(f"unknown rule {just.rule}")
            if any(p >= i for p in just.premises):
                raise EngineError("derivation is not acyclic")
        if fact_key(self.final_fact()) != fact_key(self.gadget.goal):
            raise EngineError("final fact does not match the gadget goal")


class FactStore:
    """Structurally-deduplicated fact list with justifications."""

    def __init__(self, gadget: Gadget) -> None:
        self.gadget = gadget
        self.facts: list[Fact] = []
        self.justifications: list[Justification] = []
        self._index: dict[tuple, int] = {}

    def __len__(self) -> int:
        return len(self.facts)

    def add(self, fact: Fact, rule: str, premises: Sequence[int] = ()) -> int:
        key = fact_key(fact)
        if key in self._index:
            return self._index[key]
        for p in premises:
            if not 0 <= p < len(self.facts):
                raise EngineError("premise reference out of range")
        self.facts.append(fact)
        self.justifications.append(Justification(rule, tuple(premises)))
        self._index[key] = len(self.facts) - 1
        return len(self.facts) - 1

    def find(self, fact: Fact) -> int | None:
        return self._index.get(fact_key(fact))

    def require(self, fact: Fact) -> int:
        idx = self.find(fact)
        if idx is None:
            raise ReplayFailed(f"required fact missing from store: {fact}")
        return idx

    def find_sqdist(self, p: str, q: str) -> int | None:
        for idx, fact in enumerate(self.facts):
            if isinstance(fact, SqDistKnown) and {fact.p, fact.q} == {p, q}:
                return idx
        return None

    def require_sqdist(self, p: str, q: str) -> int:
        idx = self.find_sqdist(p, q)
        if idx is None:
            raise ReplayFailed(f"no certified squared distance for ({p}, {q})")
        return idx

    def derivation(self) -> Derivation:
        d = Derivation(self.gadget, list(self.facts), list(self.justifications))
        return d


# ---------------------------------------------------------------------------
# Certificate seeding (rational-distance + injectivity + nonzero axioms)
# ---------------------------------------------------------------------------


def assert_certificate(gadget: Gadget) -> FactStore:
    """Seed a store: one SqDistKnown per certificate entry, then Distinct and
    NonzeroDist for every coordinate-distinct pair of domain points."""
    try:
        gadget.validate()
    except InvalidGadget as exc:
        raise InconsistentCertificate(str(exc)) from exc
    store = FactStore(gadget)
    for entry in gadget.certificate:
        store.add(SqDistKnown(entry.p, entry.q, entry.d2), "RationalDistanceAxiom")
    names = list(gadget.points)
    for p, q in combinations(names, 2):
        if not (gadget.points[p] == gadget.points[q]):
            store.add(Distinct(p, q), "Injectivity")
            store.add(NonzeroDist(p, q), "NonzeroDistance")
    return store


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


def _prop3_conclude(store: FactStore, premises: Sequence[int]) -> VecScale:
    facts = [store.facts[i] for i in premises]
    if len(facts) != 3 or not all(isinstance(f, SqDistKnown) for f in facts):
        raise PatternMismatch("Prop3 needs three SqDistKnown premises")
    f1, f2, f3 = facts
    names = {f1.p, f1.q} | {f2.p, f2.q} | {f3.p, f3.q}
    if len(names) != 3:
        raise PatternMismatch("Prop3 premises must form a triangle")
    orders = [(f1, f2, f3), (f1, f3, f2), (f2, f1, f3), (f2, f3, f1), (f3, f1, f2), (f3, f2, f1)]
    saw_rational_roots = False
    for zx, xxt, zxt in orders:
        shared_zx = {zx.p, zx.q} & {zxt.p, zxt.q}
        shared_x = {zx.p, zx.q} & {xxt.p, xxt.q}
        shared_xt = {xxt.p, xxt.q} & {zxt.p, zxt.q}
        if not (len(shared_zx) == len(shared_x) == len(shared_xt) == 1):
            continue
        z, x, xt = shared_zx.pop(), shared_x.pop(), shared_xt.pop()
        if len({z, x, xt}) != 3:
            continue
        sa = _frac_sqrt(zx.v)
        sb = _frac_sqrt(xxt.v)
        if sa is None or sb is None:
            continue
        saw_rational_roots = True
        for a in (sa, -sa):
            for b in (sb, -sb):
                if a + b == 0:
                    continue
                if (a + b) ** 2 == zxt.v:
                    return VecScale(a=z, b=x, c=z, d=xt, r=a / (a + b))
    if not saw_rational_roots:
        raise NonRationalPattern("no rational square-root decomposition of the given squared distances")
    raise PatternMismatch("premises do not match the a^2 / b^2 / (a+b)^2 pattern")


def _prop4_conclude(store: FactStore, premises: Sequence[int]) -> tuple[VecEq, VecEq]:
    facts = [store.facts[i] for i in premises]
    dists = [f for f in facts if isinstance(f, SqDistKnown)]
    nonzero = [f for f in facts if isinstance(f, NonzeroDist)]
    distinct = [f for f in facts if isinstance(f, Distinct)]
    if len(dists) != 4 or len(nonzero) != 1 or len(distinct) != 1:
        raise PatternMismatch(
            "Prop4 needs four SqDistKnown, one NonzeroDist and one Distinct premise"
        )
    e, f = nonzero[0].p, nonzero[0].q
    c, d = distinct[0].p, distinct[0].q
    if len({e, f, c, d}) != 4:
        raise PatternMismatch("Prop4 premise points are not four distinct names")
    values = set()
    needed = {frozenset((e, c)), frozenset((f, c)), frozenset((e, d)), frozenset((f, d))}
    seen = set()
    for fact in dists:
        pair = frozenset((fact.p, fact.q))
        if pair not in needed:
            raise PatternMismatch(f"unexpected distance pair {set(pair)}")
        seen.add(pair)
        values.add(fact.v)
    if seen != needed:
        raise PatternMismatch("distance premises do not cover EC, FC, ED, FD")
    if len(values) != 1:
        raise PatternMismatch("the four squared distances are not equal")
    # EC = DF and FC = ED, as certified coordinatewise by prop4_verify
    return VecEq(a=e, b=c, c=d, d=f), VecEq(a=f, b=c, c=d, d=e)


def _vec_algebra_conclude(store: FactStore, premises: Sequence[int], conclusion: Fact) -> Fact:
    target = _linear_relation(conclusion)
    if target is None:
        raise PatternMismatch("VecAlgebra conclusion must be a vector fact")
    vectors = []
    for i in premises:
        rel = _linear_relation(store.facts[i])
        if rel is None:
            raise PatternMismatch("VecAlgebra premises must be vector facts")
        vectors.append(rel)
    if not _in_span(target, vectors):
        raise PatternMismatch("conclusion is not a rational combination of the premises")
    return conclusion


KEMPE_PATTERN: dict[tuple[str, str], Fraction] = {
    ("A", "B"): Fraction(16),
    ("A", "D"): Fraction(16),
    ("C", "B"): Fraction(4),
    ("C", "D"): Fraction(4),
    ("C", "E"): Fraction(4),
    ("A", "F"): Fraction(9),
    ("F", "B"): Fraction(1),
    ("F", "E"): Fraction(1),
}


@lru_cache(maxsize=1)
def kempe_identities_verified() -> bool:
    """Soundness certificate: the four symbolic determinant factorizations and
    the closing dot-product identity, checked by exact expansion."""
    a, b, c, d, e = poly.variables("a b c d e")
    m1 = [
        [0, 1, 1, 1, 1],
        [1, 0, 16, e, 9],
        [1, 16, 0, c, 1],
        [1, e, c, 0, 1],
        [1, 9, 1, 1, 0],
    ]
    m2 = [
        [0, 1, 1, 1, 1],
        [1, 0, 16, b, 9],
        [1, 16, 0, 4, 1],
        [1, b, 4, 0, d],
        [1, 9, 1, d, 0],
    ]
    m3 = [
        [0, 1, 1, 1, 1],
        [1, 0, 16, b, 16],
        [1, 16, 0, 4, a],
        [1, b, 4, 0, 4],
        [1, 16, a, 4, 0],
    ]
    m4 = [
        [0, 1, 1, 1, 1],
        [1, 0, 4, c, 1],
        [1, 4, 0, 4, d],
        [1, c, 4, 0, 1],
        [1, 1, d, 1, 0],
    ]
    checks = [
        poly.identity_check(poly.det(m1), -2, [(e - 16 + 3 * c, 2)]),
        poly.identity_check(poly.det(m2), -2, [(b - 4 * d, 2)]),
        poly.identity_check(
            poly.det(m3).substitute({"b": 4 * d}), -8, [a, a * d + 4 * (d * d - 10 * d + 9)]
        ),
        poly.identity_check(poly.det(m4), -2, [c, c * d + d * d - 10 * d + 9]),
    ]
    dot = Fraction(1, 2) * a - Fraction(1, 2) * c + Fraction(1, 2) * e - 8
    checks.append(dot.substitute({"e": 16 - 3 * c, "a": 4 * c}).is_zero())
    return all(checks)


def _kempe_conclude(store: FactStore, premises: Sequence[int], roles: Mapping[str, str]) -> DotZero:
    if not kempe_identities_verified():  # pragma: no cover - identities are fixed
        raise SoundnessCertificateMissing(
            "the symbolic determinant identities were not verified in this build"
        )
    facts = [store.facts[i] for i in premises]
    dists = {frozenset((f.p, f.q)): f.v for f in facts if isinstance(f, SqDistKnown)}
    nonzero = {frozenset((f.p, f.q)) for f in facts if isinstance(f, NonzeroDist)}
    for (r1, r2), value in KEMPE_PATTERN.items():
        pair = frozenset((roles[r1], roles[r2]))
        if dists.get(pair) != value:
            raise PatternMismatch(f"missing or wrong linkage distance {r1}{r2} = {value}")
    for r1, r2 in (("B", "D"), ("B", "E"), ("C", "F")):
        if frozenset((roles[r1], roles[r2])) not in nonzero:
            raise PatternMismatch(f"missing nonzero-distance premise {r1}{r2}")
    return DotZero(a=roles["D"], b=roles["E"], c=roles["A"], d=roles["B"])


def _composition_conclude(store: FactStore, premises: Sequence[int]) -> DotZero:
    facts = [store.facts[i] for i in premises]
    dot = [f for f in facts if isinstance(f, DotZero)]
    scales = [f for f in facts if isinstance(f, VecScale)]
    if len(dot) != 1 or len(scales) != 2:
        raise PatternMismatch("Composition needs one DotZero and two VecScale premises")
    base = dot[0]
    first = {base.a, base.b}
    second = {base.c, base.d}
    new_first = new_second = None
    for scale in scales:
        src = {scale.c, scale.d}
        if src == first and new_first is None:
            new_first = (scale.a, scale.b)
        elif src == second and new_second is None:
            new_second = (scale.a, scale.b)
        else:
            raise PatternMismatch("VecScale premise does not rescale a DotZero side")
    if new_first is None or new_second is None:
        raise PatternMismatch("both DotZero sides must be rescaled")
    return DotZero(a=new_first[0], b=new_first[1], c=new_second[0], d=new_second[1])


def apply_rule(store: FactStore, rule: str, premises: Sequence[int], **params) -> list[Fact]:
    """Apply a deduction rule; returns the newly concluded fact(s), which are
    also appended to the store with full justifications."""
    if rule == "Prop3":
        conclusion = _prop3_conclude(store, premises)
        store.add(conclusion, rule, premises)
        return [conclusion]
    if rule == "Prop4":
        veceq1, veceq2 = _prop4_conclude(store, premises)
        store.add(veceq1, rule, premises)
        store.add(veceq2, rule, premises)
        return [veceq1, veceq2]
    if rule == "VecAlgebra":
        conclusion = _vec_algebra_conclude(store, premises, params["conclusion"])
        store.add(conclusion, rule, premises)
        return [conclusion]
    if rule == "KempeChain":
        conclusion = _kempe_conclude(store, premises, params["roles"])
        store.add(conclusion, rule, premises)
        return [conclusion]
    if rule == "Composition":
        conclusion = _composition_conclude(store, premises)
        store.add(conclusion, rule, premises)
        return [conclusion]
    raise EngineError(f"unknown or axiom-only rule {rule!r}")


# ---------------------------------------------------------------------------
# Replays: directed proof scripts walking a gadget's layout
# ---------------------------------------------------------------------------


def _replay_layout(store: FactStore, layout: Mapping) -> int:
    kind = layout.get("kind")
    if kind == "division":
        return _replay_division_layout(store, layout)
    if kind == "chain":
        return _replay_chain_layout(store, layout)
    if kind == "bridge":
        return _replay_bridge_layout(store, layout)
    if kind == "scale":
        return _replay_scale_layout(store, layout)
    if kind == "kempe":
        return _replay_kempe_layout(store, layout)
    if kind == "perp":
        return _replay_perp_layout(store, layout)
    raise ReplayFailed(f"no replay script for layout kind {kind!r}")


def _shadow_prop3(store: FactStore, z: str, x: str, xt: str) -> None:
    """Re-certify the ratio rule on the domain coordinates (shadow check)."""
    pts = store.gadget.points
    v_zx = store.facts[store.require_sqdist(z, x)].v
    v_xxt = store.facts[store.require_sqdist(x, xt)].v
    v_zxt = store.facts[store.require_sqdist(z, xt)].v
    a = _frac_sqrt(v_zx)
    b = _frac_sqrt(v_xxt)
    if a is None or b is None:
        raise ReplayFailed("domain shadow: certificate values are not rational squares")
    if (a + b) ** 2 != v_zxt:
        b = -b
    if (a + b) ** 2 != v_zxt or a + b == 0:
        raise ReplayFailed("domain shadow: no admissible square decomposition")
    prop3_verify(pts[z], pts[x], pts[xt], a, b)


def _replay_division_layout(store: FactStore, layout: Mapping) -> int:
    roles = layout["roles"]
    t = layout["t"]
    a, b, c, d, e, f = (roles[k] for k in "ABCDEF")
    p1 = [store.require_sqdist(a, e), store.require_sqdist(e, d), store.require_sqdist(a, d)]
    scale1 = apply_rule(store, "Prop3", p1)[0]
    p2 = [store.require_sqdist(b, f), store.require_sqdist(f, d), store.require_sqdist(b, d)]
    scale2 = apply_rule(store, "Prop3", p2)[0]
    p4 = [
        store.require_sqdist(e, c),
        store.require_sqdist(f, c),
        store.require_sqdist(e, d),
        store.require_sqdist(f, d),
        store.require(NonzeroDist(e, f)),
        store.require(Distinct(c, d)),
    ]
    veceq = apply_rule(store, "Prop4", p4)[0]
    # domain shadow checks: the lemma conclusions hold on the coordinates
    pts = store.gadget.points
    _shadow_prop3(store, a, e, d)
    _shadow_prop3(store, b, f, d)
    for fact in (scale1, scale2):
        if not (pts[fact.b] - pts[fact.a]) == (pts[fact.d] - pts[fact.c]).scaled(fact.r):
            raise ReplayFailed("Prop3 conclusion fails on domain coordinates")
    prop4_verify(pts[e], pts[f], pts[c], pts[d])
    conclusion = AffineComb(c=c, a=a, b=b, t=t)
    premises = [store.require(scale1), store.require(scale2), store.require(veceq)]
    apply_rule(store, "VecAlgebra", premises, conclusion=conclusion)
    return store.require(conclusion)


def _replay_chain_layout(store: FactStore, layout: Mapping) -> int:
    track1 = layout["track1"]
    track2 = layout["track2"]
    conclusion = VecEq(a=track1[0], b=track1[-1], c=track2[0], d=track2[-1])
    if len(track1) == 1 or track1 == track2:
        apply_rule(store, "VecAlgebra", [], conclusion=conclusion)
        return store.require(conclusion)
    pts = store.gadget.points
    step_ids = []
    for i in range(len(track1) - 1):
        a_i, a_next = track1[i], track1[i + 1]
        c_i, c_next = track2[i], track2[i + 1]
        premises = [
            store.require_sqdist(a_i, c_i),
            store.require_sqdist(c_next, c_i),
            store.require_sqdist(a_i, a_next),
            store.require_sqdist(c_next, a_next),
            store.require(NonzeroDist(a_i, c_next)),
            store.require(Distinct(c_i, a_next)),
        ]
        veceq1, veceq2 = apply_rule(store, "Prop4", premises)
        prop4_verify(pts[a_i], pts[c_next], pts[c_i], pts[a_next])
        # f(A_i)A_{i+1} = f(C_i)C_{i+1} is the second conclusion's content
        step = VecEq(a=a_i, b=a_next, c=c_i, d=c_next)
        apply_rule(
            store,
            "VecAlgebra",
            [store.require(veceq1), store.require(veceq2)],
            conclusion=step,
        )
        step_ids.append(store.require(step))
    apply_rule(store, "VecAlgebra", step_ids, conclusion=conclusion)
    return store.require(conclusion)


def _replay_bridge_layout(store: FactStore, layout: Mapping) -> int:
    sub_ids = [_replay_layout(store, sub) for sub in layout["sub"]]
    first = layout["sub"][0]
    last = layout["sub"][-1]
    conclusion = VecEq(
        a=first["track1"][0],
        b=first["track1"][-1],
        c=last["track2"][0],
        d=last["track2"][-1],
    )
    apply_rule(store, "VecAlgebra", sub_ids, conclusion=conclusion)
    return store.require(conclusion)


def _replay_scale_layout(store: FactStore, layout: Mapping) -> int:
    src = layout["src"]
    dst = layout["dst"]
    r = layout["r"]
    conclusion = VecScale(a=dst[0], b=dst[1], c=src[0], d=src[1], r=r)
    premises = [_replay_layout(store, sub) for sub in layout["sub"]]
    apply_rule(store, "VecAlgebra", premises, conclusion=conclusion)
    return store.require(conclusion)


def _replay_kempe_layout(store: FactStore, layout: Mapping) -> int:
    roles = layout["roles"]
    premises = []
    for r1, r2 in KEMPE_PATTERN:
        premises.append(store.require_sqdist(roles[r1], roles[r2]))
    for r1, r2 in (("B", "D"), ("B", "E"), ("C", "F")):
        premises.append(store.require(NonzeroDist(roles[r1], roles[r2])))
    conclusion = apply_rule(store, "KempeChain", premises, roles=roles)[0]
    return store.require(conclusion)


def _replay_perp_layout(store: FactStore, layout: Mapping) -> int:
    kempe_id = _replay_layout(store, layout["kempe"])
    scale_pq_id = _replay_layout(store, layout["scale_pq"])
    scale_xy_id = _replay_layout(store, layout["scale_xy"])
    roles = layout["kempe"]["roles"]
    pq = layout["scale_pq"]["dst"]
    xy = layout["scale_xy"]["dst"]
    scale_pq = store.facts[scale_pq_id]
    scale_xy = store.facts[scale_xy_id]
    if scale_pq.r == 0 or scale_xy.r == 0:
        raise ReplayFailed("degenerate zero ratio in perpendicularity transfer")
    conclusion = apply_rule(store, "Composition", [kempe_id, scale_pq_id, scale_xy_id])[0]
    want = DotZero(a=pq[0], b=pq[1], c=xy[0], d=xy[1])
    if fact_key(conclusion) != fact_key(want):
        raise ReplayFailed("composition did not produce the expected perpendicularity")
    return store.require(want)


def _finish(store: FactStore, goal_id: int) -> Derivation:
    goal = store.gadget.goal
    if fact_key(store.facts[goal_id]) != fact_key(goal):
        raise ReplayFailed("replay conclusion does not match the gadget goal")
    if goal_id != len(store.facts) - 1:
        # goal fact may have been deduplicated; re-anchor it at the end
        store.facts.append(store.facts[goal_id])
        store.justifications.append(store.justifications[goal_id])
    derivation = store.derivation()
    derivation.check_wellformed()
    return derivation


def replay(gadget: Gadget) -> Derivation:
    """Replay the proof script matching the gadget's construction."""
    store = assert_certificate(gadget)
    goal_id = _replay_layout(store, gadget.layout)
    return _finish(store, goal_id)


def replay_division(gadget: Gadget) -> Derivation:
    if not isinstance(gadget.goal, AffineComb) or gadget.layout.get("kind") != "division":
        raise ReplayFailed("not a division gadget (goal must be AffineComb)")
    return replay(gadget)


def replay_translation(gadget: Gadget) -> Derivation:
    if not isinstance(gadget.goal, VecEq) or gadget.layout.get("kind") not in ("chain", "bridge"):
        raise ReplayFailed("not a translation gadget (goal must be VecEq)")
    return replay(gadget)


def replay_perp(gadget: Gadget) -> Derivation:
    if not isinstance(gadget.goal, DotZero) or gadget.layout.get("kind") not in ("kempe", "perp"):
        raise ReplayFailed("not a perpendicularity gadget (goal must be DotZero)")
    return replay(gadget)


def replay_scale(a: Point, b: Point, c: Point, d: Point, r: Fraction) -> Derivation:
    """Derive f(D)-f(C) = r (f(B)-f(A)) from the domain relation D-C = r(B-A)."""
    from .gadgets import _Builder, _emit_scale, GadgetError

    r = Fraction(r)
    if not (d - c) == (b - a).scaled(r):
        raise NotAScalarMultiple("D - C is not the requested multiple of B - A")
    builder = _Builder()
    a_name = builder.add_point("A", a)
    b_name = builder.add_point("B", b)
    c_name = builder.add_point("C", c)
    d_name = builder.add_point("D", d)
    try:
        layout = _emit_scale(builder, (a_name, b_name), (c_name, d_name), r, "s")
    except GadgetError as exc:
        raise ReplayFailed(str(exc)) from exc
    goal = VecScale(a=c_name, b=d_name, c=a_name, d=b_name, r=r)
    gadget = builder.finish(goal, layout)
    store = assert_certificate(gadget)
    goal_id = _replay_layout(store, layout)
    return _finish(store, goal_id)


@dataclass
class ParallelReport:
    """Two perpendicularity derivations against a shared unit segment."""

    x: Point
    y: Point
    derivations: tuple[Derivation, ...]
    facts: tuple[Fact, ...]


def replay_parallel(a: Point, b: Point, c: Point, d: Point) -> ParallelReport:
    """Witness linear dependence of the image vectors by perpendicularity to a
    shared unit segment."""
    from .gadgets import build_perp_transfer
    from .scalars import adjoin_sqrt

    v1 = b - a
    v2 = d - c
    if not _is_zero(v1.cross(v2)):
        raise NotParallel("the two domain vectors are linearly independent")
    direction = v2 if v1.is_zero() else v1
    if direction.is_zero():
        x = a
        y = Point(a.x, a.y + 1)
        return ParallelReport(x=x, y=y, derivations=(), facts=(SqDistKnown("X", "Y", Fraction(1)),))
    q = direction.dot(direction)
    res = adjoin_sqrt(q.tower, q)
    inv_norm = res.root.inverse()
    x = a
    y = Point(
        x.x.lift(res.tower) - direction.y.lift(res.tower) * inv_norm,
        x.y.lift(res.tower) + direction.x.lift(res.tower) * inv_norm,
    )
    derivations = []
    facts: list[Fact] = [SqDistKnown("X", "Y", Fraction(1))]
    for p, qq in ((a, b), (c, d)):
        if (qq - p).is_zero():
            continue
        gadget = build_perp_transfer(p, qq, x, y)
        derivation = replay_perp(gadget)
        derivations.append(derivation)
        facts.append(derivation.final_fact())
    return ParallelReport(x=x, y=y, derivations=tuple(derivations), facts=tuple(facts))


# ---------------------------------------------------------------------------
# Model checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Verdict:
    ok: bool
    checked: int
    violated_index: int | None = None
    violated_fact: Fact | None = None

    def __bool__(self) -> bool:
        return self.ok


def check_derivation(derivation: Derivation, model) -> Verdict:
    """Evaluate every fact at the model's image coordinates; exact verdict."""
    points = derivation.gadget.points
    images: dict[str, Point] = {}
    for name, point in points.items():
        try:
            images[name] = model.apply(point)
        except Exception as exc:
            raise ModelUndefinedAtPoint(f"model undefined at {name}: {exc}") from exc

    def embed(value: Fraction):
        return model.embed_rational(value)

    for idx, fact in enumerate(derivation.facts):
        if isinstance(fact, SqDistKnown):
            ok = sqdist(images[fact.p], images[fact.q]) == embed(fact.v)
        elif isinstance(fact, Distinct):
            ok = not (images[fact.p] == images[fact.q])
        elif isinstance(fact, NonzeroDist):
            ok = not _is_zero(sqdist(images[fact.p], images[fact.q]))
        elif isinstance(fact, VecEq):
            ok = (images[fact.b] - images[fact.a]) == (images[fact.d] - images[fact.c])
        elif isinstance(fact, VecScale):
            ok = (images[fact.b] - images[fact.a]) == (
                images[fact.d] - images[fact.c]
            ).scaled(embed(fact.r))
        elif isinstance(fact, AffineComb):
            ok = (images[fact.c] - images[fact.b]) == (
                images[fact.a] - images[fact.b]
            ).scaled(embed(fact.t))
        elif isinstance(fact, DotZero):
            ok = _is_zero(
                (images[fact.b] - images[fact.a]).dot(images[fact.d] - images[fact.c])
            )
        else:  # pragma: no cover
            raise EngineError(f"unknown fact {fact!r}")
        if not ok:
            return Verdict(ok=False, checked=idx + 1, violated_index=idx, violated_fact=fact)
    return Verdict(ok=True, checked=len(derivation.facts))


def _infer_kempe_roles(store_facts: Sequence[Fact], premises: Sequence[int], conclusion: DotZero) -> dict[str, str]:
    """Recover the role assignment of a linkage step from its premise values."""
    roles = {"D": conclusion.a, "E": conclusion.b, "A": conclusion.c, "B": conclusion.d}
    dists = {frozenset((f.p, f.q)): f.v for i in premises if isinstance(f := store_facts[i], SqDistKnown)}
    names = set()
    for pair in dists:
        names |= set(pair)
    rest = names - set(roles.values())
    for name in rest:
        if dists.get(frozenset((roles["A"], name))) == 9:
            roles["F"] = name
        elif dists.get(frozenset((roles["B"], name))) == 4:
            roles["C"] = name
    if "C" not in roles or "F" not in roles:
        raise PatternMismatch("cannot recover the linkage role assignment")
    return roles


def recheck_derivation(derivation: Derivation) -> None:
    """Independently re-validate every step of a derivation.

    Re-runs each rule on its recorded premises and requires the stored fact to
    match the re-derived conclusion; axiom facts must re-verify against the
    gadget's coordinates.  Raises on the first illegitimate step.
    """
    derivation.check_wellformed()
    gadget = derivation.gadget
    gadget.validate()
    cert_values = {frozenset((e.p, e.q)): e.d2 for e in gadget.certificate}
    shadow = FactStore(gadget)
    for i, (fact, just) in enumerate(zip(derivation.facts, derivation.justifications)):
        rule = just.rule
        try:
            if rule == "RationalDistanceAxiom":
                if not isinstance(fact, SqDistKnown) or cert_values.get(frozenset((fact.p, fact.q))) != fact.v:
                    raise PatternMismatch("fact is not a certificate entry")
            elif rule == "Injectivity":
                if not isinstance(fact, Distinct) or gadget.points[fact.p] == gadget.points[fact.q]:
                    raise PatternMismatch("points are not coordinate-distinct")
            elif rule == "NonzeroDistance":
                if not isinstance(fact, NonzeroDist) or gadget.points[fact.p] == gadget.points[fact.q]:
                    raise PatternMismatch("points are not coordinate-distinct")
            elif rule == "Prop3":
                expected = _prop3_conclude(shadow, just.premises)
                if fact_key(expected) != fact_key(fact):
                    raise PatternMismatch("stored fact differs from the rule's conclusion")
            elif rule == "Prop4":
                first, second = _prop4_conclude(shadow, just.premises)
                if fact_key(fact) not in (fact_key(first), fact_key(second)):
                    raise PatternMismatch("stored fact differs from the rule's conclusions")
            elif rule == "VecAlgebra":
                _vec_algebra_conclude(shadow, just.premises, fact)
            elif rule == "KempeChain":
                if not isinstance(fact, DotZero):
                    raise PatternMismatch("linkage conclusion must be a DotZero fact")
                roles = _infer_kempe_roles(shadow.facts, just.premises, fact)
                expected = _kempe_conclude(shadow, just.premises, roles)
                if fact_key(expected) != fact_key(fact):
                    raise PatternMismatch("stored fact differs from the linkage conclusion")
            elif rule == "Composition":
                expected = _composition_conclude(shadow, just.premises)
                if fact_key(expected) != fact_key(fact):
                    raise PatternMismatch("stored fact differs from the composed conclusion")
            else:  # pragma: no cover - check_wellformed already restricts rules
                raise PatternMismatch(f"unknown rule {rule!r}")
        except PatternMismatch as exc:
            raise ReplayFailed(f"step {i} ({rule}) fails re-checking: {exc}") from exc
        # extend the shadow store verbatim so later premise indices line up
        shadow.facts.append(fact)
        shadow.justifications.append(just)


def axiom_witness(p: Point, q: Point, axiom: str):
    """Concrete witness documenting an axiom application: a third point at
    exactly-rational distances separating p from q (injectivity) or lying
    equidistant far from both (nonzero distance).

    Documentation only: the axioms' proofs quantify over a dense distance set
    that is not finitely materializable, so derivations never consume this.
    """
    from .gadgets import find_rational_bidistance_point

    if axiom == "Injectivity":
        return find_rational_bidistance_point(p, q, "distinct_distances")
    if axiom == "NonzeroDistance":
        return find_rational_bidistance_point(p, q, "equal_distances")
    raise EngineError(f"no witness construction for rule {axiom!r}")


# ---------------------------------------------------------------------------
# Bounded saturation (exploration only; excluded from acceptance)
# ---------------------------------------------------------------------------


def saturate(store: FactStore, max_depth: int = 4) -> int:
    """Exhaustively apply Prop3/Prop4 over current facts, up to a small depth.

    Returns the number of new facts.  This is a forcing-exploration aid, not
    part of any acceptance path; replays never call it.
    """
    added = 0
    for _ in range(max_depth):
        new = 0
        dist_ids = [i for i, f in enumerate(store.facts) if isinstance(f, SqDistKnown)]
        for trio in combinations(dist_ids, 3):
            try:
                before = len(store.facts)
                apply_rule(store, "Prop3", list(trio))
                new += len(store.facts) - before
            except PatternMismatch:
                continue
        nz = [i for i, f in enumerate(store.facts) if isinstance(f, NonzeroDist)]
        di = [i for i, f in enumerate(store.facts) if isinstance(f, Distinct)]
        for quad in combinations(dist_ids, 4):
            values = {store.facts[i].v for i in quad}
            if len(values) != 1:
                continue
            names = set()
            for i in quad:
                names |= {store.facts[i].p, store.facts[i].q}
            if len(names) != 4:
                continue
            for nz_id in nz:
                for di_id in di:
                    try:
                        before = len(store.facts)
                        apply_rule(store, "Prop4", list(quad) + [nz_id, di_id])
                        new += len(store.facts) - before
                    except PatternMismatch:
                        continue
        added += new
        if new == 0:
            break
    return added
