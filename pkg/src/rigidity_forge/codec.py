"""Exact text serialization: gadgets, derivations, and model descriptors.

All numbers travel as exact strings ("p" or "p/q"); binary floats are a
schema violation anywhere.  Decoding re-validates structural invariants, so
round-trips are bit-exact and tampering is detectable downstream.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from typing import Any, Mapping

from .cm import Point
from .engine import (
    Derivation,
    Distinct,
    Fact,
    Justification,
    NonzeroDist,
    SqDistKnown,
)
from .gadgets import (
    AffineComb,
    CertEntry,
    DotZero,
    Gadget,
    Goal,
    VecEq,
    VecScale,
)
from .models import Embedding, ModelMap, OrthoAffine
from .scalars import QQ, FunElem, TowerDesc, TowerElem, sqrt_in_tower

SCHEMA = "rigidity-forge/1"

_RATIONAL_RE = re.compile(r"^-?\d+(/[1-9]\d*)?$")


class SchemaViolation(ValueError):
    """Input does not conform to the file schema; the message carries a location."""


def _fail(location: str, message: str):
    raise SchemaViolation(f"{location}: {message}")


# ---------------------------------------------------------------------------
# Scalars
# ---------------------------------------------------------------------------


def encode_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def decode_rational(text: Any, location: str = "rational") -> Fraction:
    if not isinstance(text, str):
        _fail(location, f"expected an exact rational string, got {type(text).__name__}")
    if not _RATIONAL_RE.match(text):
        _fail(location, f"not an exact rational (p or p/q): {text!r}")
    return Fraction(text)


def encode_tower(tower: TowerDesc) -> dict:
    return {"gens": [[encode_rational(c) for c in g.coords] for g in tower.gens]}


def decode_tower(obj: Any, location: str = "field") -> TowerDesc:
    if not isinstance(obj, Mapping) or "gens" not in obj:
        _fail(location, "expected an object with a 'gens' list")
    tower = QQ
    for i, coords in enumerate(obj["gens"]):
        if not isinstance(coords, list) or len(coords) != tower.dim:
            _fail(f"{location}.gens[{i}]", f"expected {tower.dim} coordinates")
        rad = TowerElem(tower, tuple(decode_rational(c, f"{location}.gens[{i}][{j}]") for j, c in enumerate(coords)))
        if rad.sign() <= 0:
            _fail(f"{location}.gens[{i}]", "radicand is not strictly positive")
        if sqrt_in_tower(rad) is not None:
            _fail(f"{location}.gens[{i}]", "radicand is already a square in the tower below")
        tower = TowerDesc(tower.gens + (rad,))
    return tower


def encode_tower_elem(x: TowerElem) -> dict:
    return {"gens": encode_tower(x.tower)["gens"], "coords": [encode_rational(c) for c in x.coords]}


def decode_tower_elem(obj: Any, location: str = "scalar") -> TowerElem:
    tower = decode_tower(obj, location)
    coords = obj.get("coords")
    if not isinstance(coords, list) or len(coords) != tower.dim:
        _fail(f"{location}.coords", f"expected {tower.dim} coordinates")
    return TowerElem(tower, tuple(decode_rational(c, f"{location}.coords[{i}]") for i, c in enumerate(coords)))


def encode_fun_elem(x: FunElem) -> dict:
    return {
        "tower": encode_tower(x.tower),
        "num": [[encode_rational(c) for c in coeff.coords] for coeff in x.num],
        "den": [[encode_rational(c) for c in coeff.coords] for coeff in x.den],
    }


def decode_fun_elem(obj: Any, location: str = "scalar") -> FunElem:
    tower = decode_tower(obj.get("tower", {"gens": []}), f"{location}.tower")

    def poly(key: str):
        coeffs = obj.get(key)
        if not isinstance(coeffs, list):
            _fail(f"{location}.{key}", "expected a coefficient list")
        out = []
        for i, coords in enumerate(coeffs):
            if not isinstance(coords, list) or len(coords) != tower.dim:
                _fail(f"{location}.{key}[{i}]", f"expected {tower.dim} coordinates")
            out.append(TowerElem(tower, tuple(decode_rational(c, f"{location}.{key}[{i}][{j}]") for j, c in enumerate(coords))))
        return tuple(out)

    return FunElem(tower, poly("num"), poly("den"))


def encode_scalar(value: Any) -> Any:
    """Tagged encoding for mixed-carrier positions (layouts, model frames)."""
    if isinstance(value, (int, Fraction)):
        return {"$rat": encode_rational(Fraction(value))}
    if isinstance(value, TowerElem):
        return {"$tower": encode_tower_elem(value)}
    if isinstance(value, FunElem):
        return {"$fun": encode_fun_elem(value)}
    raise SchemaViolation(f"not an encodable scalar: {value!r}")


def decode_scalar(obj: Any, location: str = "scalar") -> Any:
    if not isinstance(obj, Mapping):
        _fail(location, "expected a tagged scalar object")
    if "$rat" in obj:
        return decode_rational(obj["$rat"], location)
    if "$tower" in obj:
        return decode_tower_elem(obj["$tower"], location)
    if "$fun" in obj:
        return decode_fun_elem(obj["$fun"], location)
    _fail(location, f"unknown scalar tag in {sorted(obj)}")


# ---------------------------------------------------------------------------
# Layouts (JSON-able recipes with embedded exact scalars)
# ---------------------------------------------------------------------------


def encode_layout(value: Any) -> Any:
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    if isinstance(value, (Fraction,)):
        return {"$rat": encode_rational(value)}
    if isinstance(value, TowerElem):
        return {"$tower": encode_tower_elem(value)}
    if isinstance(value, FunElem):
        return {"$fun": encode_fun_elem(value)}
    if isinstance(value, (list, tuple)):
        return [encode_layout(v) for v in value]
    if isinstance(value, Mapping):
        return {k: encode_layout(v) for k, v in value.items()}
    raise SchemaViolation(f"layout value not encodable: {value!r}")


def decode_layout(value: Any, location: str = "layout") -> Any:
    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, float):
        _fail(location, "binary floats are forbidden; use exact rational strings")
    if isinstance(value, list):
        return [decode_layout(v, f"{location}[{i}]") for i, v in enumerate(value)]
    if isinstance(value, Mapping):
        if "$rat" in value or "$tower" in value or "$fun" in value:
            return decode_scalar(value, location)
        return {k: decode_layout(v, f"{location}.{k}") for k, v in value.items()}
    _fail(location, f"unsupported layout value {value!r}")


# ---------------------------------------------------------------------------
# Goals and facts
# ---------------------------------------------------------------------------


def encode_goal(goal: Goal) -> dict:
    if isinstance(goal, AffineComb):
        return {"kind": "AffineComb", "c": goal.c, "a": goal.a, "b": goal.b, "t": encode_rational(goal.t)}
    if isinstance(goal, VecEq):
        return {"kind": "VecEq", "a": goal.a, "b": goal.b, "c": goal.c, "d": goal.d}
    if isinstance(goal, VecScale):
        return {"kind": "VecScale", "a": goal.a, "b": goal.b, "c": goal.c, "d": goal.d, "r": encode_rational(goal.r)}
    if isinstance(goal, DotZero):
        return {"kind": "DotZero", "a": goal.a, "b": goal.b, "c": goal.c, "d": goal.d}
    raise SchemaViolation(f"unknown goal {goal!r}")


def decode_goal(obj: Any, location: str = "goal") -> Goal:
    if not isinstance(obj, Mapping) or "kind" not in obj:
        _fail(location, "expected a tagged goal object")
    kind = obj["kind"]
    try:
        if kind == "AffineComb":
            return AffineComb(c=obj["c"], a=obj["a"], b=obj["b"], t=decode_rational(obj["t"], f"{location}.t"))
        if kind == "VecEq":
            return VecEq(a=obj["a"], b=obj["b"], c=obj["c"], d=obj["d"])
        if kind == "VecScale":
            return VecScale(a=obj["a"], b=obj["b"], c=obj["c"], d=obj["d"], r=decode_rational(obj["r"], f"{location}.r"))
        if kind == "DotZero":
            return DotZero(a=obj["a"], b=obj["b"], c=obj["c"], d=obj["d"])
    except KeyError as exc:
        _fail(location, f"missing field {exc}")
    _fail(location, f"unknown goal kind {kind!r}")


def encode_fact(fact: Fact) -> dict:
    if isinstance(fact, SqDistKnown):
        return {"kind": "SqDistKnown", "p": fact.p, "q": fact.q, "v": encode_rational(fact.v)}
    if isinstance(fact, Distinct):
        return {"kind": "Distinct", "p": fact.p, "q": fact.q}
    if isinstance(fact, NonzeroDist):
        return {"kind": "NonzeroDist", "p": fact.p, "q": fact.q}
    return encode_goal(fact)


def decode_fact(obj: Any, location: str = "fact") -> Fact:
    if not isinstance(obj, Mapping) or "kind" not in obj:
        _fail(location, "expected a tagged fact object")
    kind = obj["kind"]
    if kind == "SqDistKnown":
        return SqDistKnown(p=obj["p"], q=obj["q"], v=decode_rational(obj["v"], f"{location}.v"))
    if kind == "Distinct":
        return Distinct(p=obj["p"], q=obj["q"])
    if kind == "NonzeroDist":
        return NonzeroDist(p=obj["p"], q=obj["q"])
    return decode_goal(obj, location)


# ---------------------------------------------------------------------------
# Gadgets
# ---------------------------------------------------------------------------


def encode_gadget(gadget: Gadget) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "gadget",
        "field": encode_tower(gadget.tower),
        "points": {
            name: [
                [encode_rational(c) for c in p.x.coords],
                [encode_rational(c) for c in p.y.coords],
            ]
            for name, p in gadget.points.items()
        },
        "certificate": [
            {"p": e.p, "q": e.q, "d2": encode_rational(e.d2)} for e in gadget.certificate
        ],
        "side_conditions": [list(pair) for pair in gadget.side_conditions],
        "goal": encode_goal(gadget.goal),
        "layout": encode_layout(gadget.layout),
    }


def decode_gadget(obj: Any) -> Gadget:
    if not isinstance(obj, Mapping):
        _fail("gadget", "expected a JSON object")
    if obj.get("schema") != SCHEMA:
        _fail("schema", f"expected {SCHEMA!r}, got {obj.get('schema')!r}")
    if obj.get("kind") != "gadget":
        _fail("kind", f"expected 'gadget', got {obj.get('kind')!r}")
    tower = decode_tower(obj.get("field", {}), "field")
    points_obj = obj.get("points")
    if not isinstance(points_obj, Mapping):
        _fail("points", "expected an object of name -> [x, y]")
    points: dict[str, Point] = {}
    for name, pair in points_obj.items():
        loc = f"points.{name}"
        if not isinstance(pair, list) or len(pair) != 2:
            _fail(loc, "expected [x_coords, y_coords]")
        coords = []
        for axis, coord_list in zip("xy", pair):
            if not isinstance(coord_list, list) or len(coord_list) != tower.dim:
                _fail(f"{loc}.{axis}", f"expected {tower.dim} coordinates")
            coords.append(
                TowerElem(tower, tuple(decode_rational(c, f"{loc}.{axis}[{i}]") for i, c in enumerate(coord_list)))
            )
        points[name] = Point(coords[0], coords[1])
    certificate = []
    for i, entry in enumerate(obj.get("certificate", [])):
        loc = f"certificate[{i}]"
        if not isinstance(entry, Mapping) or not {"p", "q", "d2"} <= set(entry):
            _fail(loc, "expected {p, q, d2}")
        if entry["p"] not in points or entry["q"] not in points:
            _fail(loc, f"unknown point {entry['p']!r}/{entry['q']!r}")
        certificate.append(CertEntry(entry["p"], entry["q"], decode_rational(entry["d2"], f"{loc}.d2")))
    sides = []
    for i, pair in enumerate(obj.get("side_conditions", [])):
        if not isinstance(pair, list) or len(pair) != 2:
            _fail(f"side_conditions[{i}]", "expected a name pair")
        if pair[0] not in points or pair[1] not in points:
            _fail(f"side_conditions[{i}]", f"unknown point in {pair}")
        sides.append((pair[0], pair[1]))
    goal = decode_goal(obj.get("goal"), "goal")
    for name in (goal.a, goal.b, goal.c) if isinstance(goal, AffineComb) else (goal.a, goal.b, goal.c, goal.d):
        if name not in points:
            _fail("goal", f"unknown point {name!r}")
    layout = decode_layout(obj.get("layout", {}), "layout")
    return Gadget(
        tower=tower,
        points=points,
        certificate=tuple(certificate),
        side_conditions=tuple(sides),
        goal=goal,
        layout=layout,
    )


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------


def encode_derivation(derivation: Derivation) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "derivation",
        "gadget": encode_gadget(derivation.gadget),
        "facts": [
            {"fact": encode_fact(f), "rule": j.rule, "premises": list(j.premises)}
            for f, j in zip(derivation.facts, derivation.justifications)
        ],
    }


def decode_derivation(obj: Any) -> Derivation:
    if not isinstance(obj, Mapping):
        _fail("derivation", "expected a JSON object")
    if obj.get("schema") != SCHEMA:
        _fail("schema", f"expected {SCHEMA!r}, got {obj.get('schema')!r}")
    if obj.get("kind") != "derivation":
        _fail("kind", f"expected 'derivation', got {obj.get('kind')!r}")
    gadget = decode_gadget(obj.get("gadget"))
    facts = []
    justs = []
    for i, step in enumerate(obj.get("facts", [])):
        loc = f"facts[{i}]"
        if not isinstance(step, Mapping) or not {"fact", "rule", "premises"} <= set(step):
            _fail(loc, "expected {fact, rule, premises}")
        facts.append(decode_fact(step["fact"], f"{loc}.fact"))
        premises = step["premises"]
        if not isinstance(premises, list) or any(not isinstance(p, int) for p in premises):
            _fail(f"{loc}.premises", "expected a list of fact indices")
        justs.append(Justification(step["rule"], tuple(premises)))
    derivation = Derivation(gadget, facts, justs)
    derivation.check_wellformed()
    return derivation


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------


def encode_model(model: ModelMap) -> dict:
    emb = {"kind": model.embedding.kind}
    if model.embedding.kind == "conjugation":
        emb["domain"] = encode_tower(model.embedding.domain)
        emb["generator"] = model.embedding.generator
    frame = None
    if model.frame is not None:
        frame = {
            "matrix": [[encode_scalar(entry) for entry in row] for row in model.frame.matrix],
            "translation": None
            if model.frame.translation is None
            else [encode_scalar(entry) for entry in model.frame.translation],
        }
    return {"schema": SCHEMA, "kind": "model", "embedding": emb, "frame": frame}


def decode_model(obj: Any) -> ModelMap:
    if not isinstance(obj, Mapping):
        _fail("model", "expected a JSON object")
    if obj.get("schema") != SCHEMA:
        _fail("schema", f"expected {SCHEMA!r}, got {obj.get('schema')!r}")
    if obj.get("kind") != "model":
        _fail("kind", f"expected 'model', got {obj.get('kind')!r}")
    emb_obj = obj.get("embedding")
    if not isinstance(emb_obj, Mapping) or "kind" not in emb_obj:
        _fail("embedding", "expected a tagged embedding object")
    kind = emb_obj["kind"]
    if kind == "conjugation":
        embedding = Embedding(
            "conjugation",
            domain=decode_tower(emb_obj.get("domain", {}), "embedding.domain"),
            generator=emb_obj.get("generator"),
        )
    elif kind in ("identity", "function_field"):
        embedding = Embedding(kind)
    else:
        _fail("embedding.kind", f"unknown embedding kind {kind!r}")
    frame_obj = obj.get("frame")
    frame = None
    if frame_obj is not None:
        matrix = frame_obj.get("matrix")
        if not isinstance(matrix, list) or len(matrix) != 2 or any(len(row) != 2 for row in matrix):
            _fail("frame.matrix", "expected a 2x2 matrix")
        rows = tuple(
            tuple(decode_scalar(entry, f"frame.matrix[{i}][{j}]") for j, entry in enumerate(row))
            for i, row in enumerate(matrix)
        )
        translation = frame_obj.get("translation")
        trans = None
        if translation is not None:
            if not isinstance(translation, list) or len(translation) != 2:
                _fail("frame.translation", "expected two scalars")
            trans = tuple(decode_scalar(entry, f"frame.translation[{i}]") for i, entry in enumerate(translation))
        frame = OrthoAffine(matrix=rows, translation=trans)
    return ModelMap(embedding=embedding, frame=frame)


# ---------------------------------------------------------------------------
# File helpers
# ---------------------------------------------------------------------------


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)


def load_document(text: str) -> Any:
    try:
        return json.loads(text, parse_float=_reject_float, parse_int=int)
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"not valid JSON: {exc}") from exc


def _reject_float(text: str):
    raise SchemaViolation(f"binary float {text!r} is forbidden; numbers must be exact strings")


def decode_document(text: str):
    """Dispatch on the document kind: gadget, derivation, or model."""
    obj = load_document(text)
    if not isinstance(obj, Mapping):
        _fail("document", "expected a JSON object")
    kind = obj.get("kind")
    if kind == "gadget":
        return decode_gadget(obj)
    if kind == "derivation":
        return decode_derivation(obj)
    if kind == "model":
        return decode_model(obj)
    _fail("kind", f"unknown document kind {kind!r}")
