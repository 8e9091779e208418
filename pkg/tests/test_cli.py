"""Command-line behaviour: subcommands, files, exit codes."""

import json

import pytest

from rigidity_forge.cli import main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gadget_then_replay_roundtrip(tmp_path, capsys):
    gadget_file = tmp_path / "kempe.json"
    code, _, _ = run(["gadget", "kempe", "--t", "1", "-o", str(gadget_file)], capsys)
    assert code == 0
    code, out, _ = run(["replay", str(gadget_file)], capsys)
    assert code == 0
    assert "DotZero" in out


def test_division_gadget_with_radius_override(tmp_path, capsys):
    gadget_file = tmp_path / "div.json"
    code, _, _ = run(["gadget", "division", "--t", "1/2", "--r", "3", "-o", str(gadget_file)], capsys)
    assert code == 0
    doc = json.loads(gadget_file.read_text())
    assert doc["layout"]["r"] == {"$rat": "3"}


def test_verify_accepts_clean_and_rejects_tampered(tmp_path, capsys):
    gadget_file = tmp_path / "div.json"
    run(["gadget", "division", "--t", "1/3", "--b", "2,0", "-o", str(gadget_file)], capsys)
    code, out, _ = run(["verify", str(gadget_file)], capsys)
    assert code == 0 and "verified" in out
    doc = json.loads(gadget_file.read_text())
    doc["certificate"][0]["d2"] = "99"
    tampered = tmp_path / "tampered.json"
    tampered.write_text(json.dumps(doc))
    code, _, err = run(["verify", str(tampered)], capsys)
    assert code == 1
    assert "mismatch" in err


def test_verify_rejects_floats(tmp_path, capsys):
    gadget_file = tmp_path / "div.json"
    run(["gadget", "division", "--t", "1/2", "-o", str(gadget_file)], capsys)
    raw = gadget_file.read_text().replace('"d2": "1/4"', '"d2": 0.25', 1)
    bad = tmp_path / "float.json"
    bad.write_text(raw)
    code, _, err = run(["verify", str(bad)], capsys)
    assert code == 1
    assert "float" in err


def test_replay_writes_derivation_and_model_check_reads_it(tmp_path, capsys):
    gadget_file = tmp_path / "div.json"
    deriv_file = tmp_path / "deriv.json"
    run(["gadget", "division", "--t", "1/2", "-o", str(gadget_file)], capsys)
    code, _, _ = run(["replay", str(gadget_file), "-o", str(deriv_file)], capsys)
    assert code == 0
    assert json.loads(deriv_file.read_text())["kind"] == "derivation"
    for model in ("identity", "conj:0", "eps-rotation", "eps-reflection", "conj-rot:0"):
        code, out, _ = run(["model-check", str(deriv_file), "--model", model], capsys)
        assert code == 0, model
        assert "all-true" in out


def test_model_check_on_gadget_file_replays_first(tmp_path, capsys):
    gadget_file = tmp_path / "kempe.json"
    run(["gadget", "kempe", "--t", "1/2", "-o", str(gadget_file)], capsys)
    code, out, _ = run(["model-check", str(gadget_file), "--model", "eps-rotation"], capsys)
    assert code == 0
    assert "preservation: ok" in out


def test_model_check_via_descriptor_file(tmp_path, capsys):
    from rigidity_forge import codec
    from rigidity_forge.models import eps_rotation_model

    gadget_file = tmp_path / "div.json"
    run(["gadget", "division", "--t", "1/2", "-o", str(gadget_file)], capsys)
    model_file = tmp_path / "model.json"
    model_file.write_text(codec.dumps(codec.encode_model(eps_rotation_model())))
    code, out, _ = run(["model-check", str(gadget_file), "--model", f"@{model_file}"], capsys)
    assert code == 0
    assert "all-true" in out


def test_identities_prints_all_four(capsys):
    code, out, _ = run(["identities"], capsys)
    assert code == 0
    assert out.count("ok ") == 4
    assert "-2*(e - 16 + 3c)^2" in out


def test_usage_errors_exit_2(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus-command"])
    assert exc.value.code == 2
    code, _, err = run(["gadget", "division"], capsys)  # missing --t
    assert code == 2
    code, _, err = run(["gadget", "kempe", "--t", "0"], capsys)
    assert code == 2
    assert "tangent" in err


def test_missing_file_exits_2(capsys):
    code, _, err = run(["verify", "/nonexistent/nothing.json"], capsys)
    assert code == 2


def test_chain_and_bridge_and_perp_commands(tmp_path, capsys):
    chain_file = tmp_path / "chain.json"
    code, _, _ = run(
        ["gadget", "chain", "--a", "0,0", "--b", "5,0", "--c", "0,1", "--d", "5,1", "-o", str(chain_file)],
        capsys,
    )
    assert code == 0
    code, out, _ = run(["replay", str(chain_file)], capsys)
    assert code == 0 and "VecEq" in out
    perp_file = tmp_path / "perp.json"
    code, _, _ = run(
        ["gadget", "perp", "--p", "0,0", "--q", "0,12/5", "--x", "0,0", "--y", "4,0", "-o", str(perp_file)],
        capsys,
    )
    assert code == 0
    code, out, _ = run(["replay", str(perp_file)], capsys)
    assert code == 0 and "DotZero" in out


def test_exit_codes_stable_across_repeats(tmp_path, capsys):
    gadget_file = tmp_path / "k.json"
    first = run(["gadget", "kempe", "--t", "1", "-o", str(gadget_file)], capsys)[0]
    text_first = gadget_file.read_text()
    second = run(["gadget", "kempe", "--t", "1", "-o", str(gadget_file)], capsys)[0]
    assert first == second == 0
    assert gadget_file.read_text() == text_first
