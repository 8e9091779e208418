"""Bit-exact serialization round-trips and schema enforcement."""

import json
from fractions import Fraction

import pytest

from rigidity_forge import codec
from rigidity_forge.cm import Point, rational_point
from rigidity_forge.engine import replay_division, replay_perp
from rigidity_forge.gadgets import (
    build_division,
    build_kempe,
    build_perp_transfer,
    build_rhombus_chain,
    build_translation_bridge,
)
from rigidity_forge.models import ModelMap, conjugation_model, eps_rotation_model, identity_model, make_pythagorean_rotation
from rigidity_forge.scalars import QQ, adjoin_sqrt

F = Fraction


def gadget_corpus():
    root2 = adjoin_sqrt(QQ, 2)
    return [
        build_division(rational_point(0, 0), rational_point(1, 0), F(1, 2)),
        build_division(rational_point(0, 0), rational_point(2, 0), F(7, 9)),
        build_rhombus_chain(rational_point(0, 0), rational_point(5, 0), rational_point(0, 1), rational_point(5, 1)),
        build_translation_bridge(
            rational_point(0, 0),
            rational_point(1, 0),
            Point(root2.root, root2.root + 1),
            Point(root2.root + 1, root2.root + 1),
        ),
        build_kempe(F(1)),
        build_kempe(F(3, 4)),
        build_perp_transfer(rational_point(0, 0), rational_point(0, F(12, 5)), rational_point(0, 0), rational_point(4, 0)),
    ]


@pytest.mark.parametrize("gadget", gadget_corpus(), ids=lambda g: g.layout["kind"])
def test_gadget_round_trip_is_structural_identity(gadget):
    text = codec.dumps(codec.encode_gadget(gadget))
    decoded = codec.decode_gadget(codec.load_document(text))
    assert decoded == gadget
    # encoding again yields byte-identical text
    assert codec.dumps(codec.encode_gadget(decoded)) == text


def test_rational_strings_survive_exactly():
    for value in (F(1, 3), F(-22, 7), F(5), F(0), F(-1, 999983)):
        assert codec.decode_rational(codec.encode_rational(value)) == value


def test_rational_rejects_decimals_and_garbage():
    for bad in ("0.5", "1e3", "", "1/0", "1/-2", "--1", "½"):
        with pytest.raises(codec.SchemaViolation):
            codec.decode_rational(bad)


def test_document_rejects_binary_floats():
    with pytest.raises(codec.SchemaViolation, match="float"):
        codec.load_document('{"schema": "rigidity-forge/1", "x": 0.5}')


def test_gadget_schema_violations_carry_location():
    gadget = gadget_corpus()[0]
    doc = codec.encode_gadget(gadget)
    doc_bad = json.loads(codec.dumps(doc))
    doc_bad["points"]["A"][0] = ["1", "2", "3"]  # wrong arity for the tower
    with pytest.raises(codec.SchemaViolation, match="points.A"):
        codec.decode_gadget(doc_bad)
    doc_bad2 = json.loads(codec.dumps(doc))
    doc_bad2["schema"] = "rigidity-forge/0"
    with pytest.raises(codec.SchemaViolation, match="schema"):
        codec.decode_gadget(doc_bad2)
    doc_bad3 = json.loads(codec.dumps(doc))
    doc_bad3["certificate"][0]["p"] = "NOPE"
    with pytest.raises(codec.SchemaViolation, match="certificate"):
        codec.decode_gadget(doc_bad3)


def test_tower_decoding_enforces_invariants():
    with pytest.raises(codec.SchemaViolation, match="positive"):
        codec.decode_tower({"gens": [["-2"]]})
    with pytest.raises(codec.SchemaViolation, match="square"):
        codec.decode_tower({"gens": [["4"]]})
    with pytest.raises(codec.SchemaViolation, match="square"):
        codec.decode_tower({"gens": [["2"], ["8", "0"]]})  # 8 = (2*sqrt2)^2


def test_derivation_round_trip():
    gadget = build_division(rational_point(0, 0), rational_point(1, 0), F(2, 5))
    derivation = replay_division(gadget)
    text = codec.dumps(codec.encode_derivation(derivation))
    decoded = codec.decode_derivation(codec.load_document(text))
    assert decoded.facts == derivation.facts
    assert decoded.justifications == derivation.justifications
    assert decoded.gadget == derivation.gadget


def test_derivation_round_trip_for_composite():
    gadget = build_perp_transfer(rational_point(0, 0), rational_point(0, F(24, 5)), rational_point(0, 0), rational_point(8, 0))
    derivation = replay_perp(gadget)
    text = codec.dumps(codec.encode_derivation(derivation))
    decoded = codec.decode_derivation(codec.load_document(text))
    assert decoded.facts == derivation.facts


def test_model_round_trips():
    tower = adjoin_sqrt(QQ, 2).tower
    models = [
        identity_model(),
        conjugation_model(tower, 0),
        eps_rotation_model(),
        eps_rotation_model(reflection=True),
        ModelMap(conjugation_model(tower, 0).embedding, make_pythagorean_rotation(F(1, 2), translation=(F(3), F(-1, 2)))),
    ]
    for model in models:
        text = codec.dumps(codec.encode_model(model))
        assert codec.decode_model(codec.load_document(text)) == model


def test_random_tower_elements_round_trip():
    from hypothesis import given, settings
    from hypothesis import strategies as st
    from rigidity_forge.scalars import TowerElem

    t2 = adjoin_sqrt(QQ, 2)
    t23 = adjoin_sqrt(t2.tower, 3)
    nested = adjoin_sqrt(t2.tower, t2.tower.one() + t2.root)
    towers = [QQ, t2.tower, t23.tower, nested.tower]
    coords = st.fractions(min_value=-99, max_value=99, max_denominator=30)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=0, max_value=3), st.lists(coords, min_size=8, max_size=8))
    def run(tower_index, values):
        tower = towers[tower_index]
        element = TowerElem(tower, tuple(values[: tower.dim]))
        encoded = codec.encode_tower_elem(element)
        decoded = codec.decode_tower_elem(json.loads(codec.dumps(encoded)))
        assert decoded.tower == element.tower
        assert decoded.coords == element.coords

    run()


def test_random_function_field_elements_round_trip():
    from hypothesis import given, settings
    from hypothesis import strategies as st
    from rigidity_forge.scalars import FunElem

    tower = adjoin_sqrt(QQ, 2).tower
    coords = st.fractions(min_value=-20, max_value=20, max_denominator=9)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(coords, min_size=2, max_size=6), st.lists(coords, min_size=2, max_size=6))
    def run(num_vals, den_vals):
        num = [tower.rational(v) + tower.generator(0) * w for v, w in zip(num_vals[::2], num_vals[1::2])]
        den = [tower.rational(v) for v in den_vals]
        if all(c.is_zero() for c in den):
            den = [tower.one()]
        element = FunElem(tower, num, den)
        encoded = codec.encode_fun_elem(element)
        decoded = codec.decode_fun_elem(json.loads(codec.dumps(encoded)))
        assert decoded == element

    run()


def test_document_dispatch():
    gadget = gadget_corpus()[0]
    assert codec.decode_document(codec.dumps(codec.encode_gadget(gadget))) == gadget
    model = identity_model()
    assert codec.decode_document(codec.dumps(codec.encode_model(model))) == model
    with pytest.raises(codec.SchemaViolation, match="kind"):
        codec.decode_document('{"schema": "rigidity-forge/1", "kind": "mystery"}')
