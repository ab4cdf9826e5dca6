import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from latticetft import centrefun as cf
from latticetft import cli
from latticetft import exactlin as el
from latticetft import io
from latticetft import surface as sf
from latticetft import verify as vf
from latticetft.algebra import change_basis, standard_library

from conftest import SCENES

LIB = standard_library()


def run_cli(*argv):
    r = subprocess.run([sys.executable, "-m", "latticetft", *argv], capture_output=True, text=True)
    return r.returncode, r.stdout, r.stderr


# ---------------------------------------------------------------- round trips

invertible = st.lists(st.integers(-2, 2), min_size=9, max_size=9).map(
    lambda xs: el.array(np.array(xs, dtype=object).reshape(3, 3))).filter(el.is_invertible)


@given(invertible, st.sampled_from(["T2", "Z3"]))
def test_algebra_round_trip(P, name):
    A = change_basis(LIB[name], P)
    doc = io.algebra_to_doc(A)
    B = io.algebra_from_doc(json.loads(io.dumps(doc)))
    assert B.same_as(A)
    assert io.algebra_to_doc(B) == doc


@pytest.mark.parametrize("spec", ["q", "fp:5"])
def test_scene_round_trips(spec):
    for path in sorted(SCENES.glob("*.json")):
        doc = io.load_json(path)
        if doc.get("kind") == "algebra":
            continue
        sc = io.scene_from_doc(doc, el.field_from_spec(spec))
        text = sc.dumps()
        again = io.scene_from_doc(json.loads(text))
        assert again.dumps() == text, path.name
        for k, M in sc.bordisms.items():
            assert again.bordisms[k] == M
        for k, C in sc.cospans.items():
            assert again.cospans[k].same_as(C)
        for k, m in sc.maps.items():
            assert el.equal(again.maps[k].matrix, m.matrix)


def test_surface_and_circle_documents(sig):
    for name, M in vf.standard_corpus(sig).items():
        doc = json.loads(io.dumps(io.surface_to_doc(M)))
        assert io.surface_from_doc(doc, sig, {}) == M
    c = sf.circle_from_word(sig, (("u", 1), ("v", 1))).rotated(1)
    assert io.circle_from_doc(io.circle_to_doc(c)) == c
    assert io.parse_word_circle("u+ v+") == sf.circle_from_word(sig, (("u", 1), ("v", 1)))


def test_signature_round_trip_preserves_amplitudes(sig):
    sc = io.Scene(signature=sig, bordisms={"t3": sf.standard_bordisms(sig)["junction[t3]"]})
    again = io.scene_from_doc(json.loads(sc.dumps()))
    from latticetft.tft import TFT
    a = TFT(sig).evaluate(sc.bordisms["t3"]).matrix
    b = TFT(again.signature).evaluate(again.bordisms["t3"]).matrix
    assert el.equal(a, b)


def test_one_dimensional_round_trip():
    sc = io.load_scene(SCENES / "circle1d.json")
    doc = sc.to_doc()
    assert io.theory_to_doc(io.theory_from_doc(doc["theory"])) == doc["theory"]
    for d in doc["diagrams"].values():
        assert io.diagram_to_doc(io.diagram_from_doc(d)) == d


def test_scene_errors():
    with pytest.raises(io.SceneError):
        io.scene_from_doc({"algebras": {"a": {"builtin": "nope"}}})
    with pytest.raises(io.SceneError):
        io.scene_from_doc({"maps": {"f": {"source": "x", "target": "y", "matrix": []}}})
    with pytest.raises(io.SceneError):
        io.parse_word("u")


# ---------------------------------------------------------------- command line

def test_check_algebra_values():
    code, out, _ = run_cli("check-algebra", str(SCENES / "t2.json"), "--json")
    rep = json.loads(out)
    assert code == 0
    assert (rep["frobenius"], rep["dim_centre"], rep["dim_quotient"]) == (False, 1, 2)
    rep = json.loads(run_cli("check-algebra", str(SCENES / "m2.json"), "--json")[1])
    assert (rep["frobenius"], rep["dim_centre"], rep["dim_quotient"], rep["lemma33_consistent"]) == (True, 1, 1, True)
    rep = json.loads(run_cli("check-algebra", "builtin:k", "--json")[1])
    assert (rep["frobenius"], rep["dim_centre"], rep["dim_quotient"]) == (True, 1, 1)


def test_corrupted_input_exits_2():
    code, out, err = run_cli("check-algebra", str(SCENES / "corrupt.json"))
    assert code == 2 and "not a right unit" in err and not out
    assert run_cli("evaluate", "--scene", "missing.json", "x")[0] == 2
    assert run_cli("evaluate", "--scene", str(SCENES / "cylinder.json"), "nope")[0] == 2
    assert run_cli("check-algebra", "builtin:k", "--field", "fp:4")[0] == 2


def test_evaluate_reports_are_byte_stable():
    args = ("evaluate", "--scene", str(SCENES / "standard.json"), "junction[t3]", "--json")
    first, second = run_cli(*args), run_cli(*args)
    assert first[0] == 0 and first[1] == second[1]
    rep = json.loads(first[1])
    assert set(rep) == {"source_dims", "target_dims", "matrix", "network_stats"}


def test_evaluate_cylinder_and_torus():
    rep = json.loads(run_cli("evaluate", "--scene", str(SCENES / "cylinder.json"), "wall_cylinder", "--json")[1])
    n = len(rep["matrix"])
    assert rep["matrix"] == [["1" if i == j else "0" for j in range(n)] for i in range(n)]
    torus = json.loads(run_cli("evaluate", "--scene", str(SCENES / "standard.json"), "torus[sw]", "--json")[1])
    state = json.loads(run_cli("state-space", "--scene", str(SCENES / "standard.json"), "sw+", "--json")[1])
    assert torus["matrix"] == [[str(state["dim"])]]


def test_evaluate_one_dimensional():
    rep = json.loads(run_cli("evaluate", "--scene", str(SCENES / "circle1d.json"), "bare", "--json")[1])
    assert rep["scalar"] == "3"


def test_lax_check_notes_non_invertible():
    code, out, _ = run_cli("lax-check", "--scene", str(SCENES / "centre.json"), "diag", "proj", "--json")
    rep = json.loads(out)
    assert code == 0
    assert rep["note"] == "m not invertible (4→2)"
    assert rep["surjective"] and not rep["injective"]


@pytest.mark.parametrize("suite", ["lax", "coherence", "invertibility"])
def test_verify_centre_suites(suite):
    code, out, _ = run_cli("verify", suite, "--scene", str(SCENES / "centre.json"), "--json")
    rep = json.loads(out)
    assert code == 0 and rep["ok"] and rep["checks"]


@pytest.mark.parametrize("suite", ["moves", "functoriality", "amplitudes", "cardy", "adjunction"])
def test_verify_surface_suites(suite):
    code, out, _ = run_cli("verify", suite, "--scene", str(SCENES / "standard.json"))
    assert code == 0, out
    assert out.strip().endswith("passed")


def test_verification_failure_exits_1(monkeypatch, capsys):
    monkeypatch.setattr(vf, "cardy", lambda T, walls: [vf.Check("cardy", "forced", False, {"why": "test"})])
    assert cli.main(["cardy", "--scene", str(SCENES / "standard.json"), "z2"]) == 1
    assert "FAIL cardy forced" in capsys.readouterr().out


def test_cospan_verbs():
    code, out, _ = run_cli("cospan-compose", "--scene", str(SCENES / "centre.json"), "Z(proj)", "Z(diag)", "--json")
    assert code == 0 and json.loads(out)["valid"]
    code, _, err = run_cli("cospan-compose", "--scene", str(SCENES / "centre.json"), "Z(diag)", "Z(diag)")
    assert code == 2 and "cannot compose" in err
    rep = json.loads(run_cli("centre-cospan", "--scene", str(SCENES / "centre.json"), "diag", "--json")[1])
    assert rep["containments"] and not rep["invertible"]["invertible"]


def test_defect_op_and_field_override():
    rep = json.loads(run_cli("defect-op", "--scene", str(SCENES / "standard.json"), "z2", "--json")[1])
    assert rep["matrix"] == [["1", "0"], ["0", "1"]]
    rep = json.loads(run_cli("check-algebra", "builtin:M2", "--field", "fp:2", "--json")[1])
    assert rep["frobenius"] is False


def test_check_bimodule(tmp_path):
    doc = {"algebras": {"Z2": {"builtin": "Z2"}}, "bimodules": {"R": {"construct": "regular", "algebra": "Z2"}}}
    p = tmp_path / "b.json"
    p.write_text(json.dumps(doc))
    rep = json.loads(run_cli("check-bimodule", str(p), "--json")[1])
    assert rep["dim_cyclic_tensor"] == 2 and rep["dim_endomorphisms"] == 2
