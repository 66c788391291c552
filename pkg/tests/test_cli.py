import json

import numpy as np
import pytest

from supersep import __version__
from supersep import io as jio
from supersep.cli import main
from supersep.errors import ParseError
from supersep.states import PLUS, PureState, bell_states, random_state
from supersep.ueb import UebCandidate, verify_r_ueb


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_state(path, s):
    path.write_text(jio.dumps(s))
    return str(path)


@pytest.fixture
def ex3(tmp_path):
    a = write_state(tmp_path / "ex3_e.json", bell_states()["phi-"])
    b = write_state(tmp_path / "ex3_p.json", PureState.product(PLUS, PLUS))
    return a, b


# io ------------------------------------------------------------------------

def test_state_roundtrip():
    s = random_state(3, 2, 5)
    t = jio.state_from_json(json.loads(jio.dumps(s)))
    assert np.array_equal(s.coeffs, t.coeffs)


def test_parse_error_location():
    with pytest.raises(ParseError) as exc:
        jio.loads('{"d1": 2,\n "d2": }')
    assert exc.value.line == 2 and exc.value.offset is not None


def test_parse_error_shape():
    with pytest.raises(ParseError):
        jio.state_from_json({"d1": 2, "d2": 2, "coeffs": [[[1, 0]]]})
    with pytest.raises(ParseError):
        jio.state_from_json({"d1": 2, "coeffs": []})


# cli -------------------------------------------------------------------------

def test_classify_pair_example3(capsys, ex3):
    code, out, _ = run(capsys, "classify-pair", "--a", ex3[0], "--b", ex3[1], "--json")
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"command", "version", "config", "result"}
    assert rep["version"] == __version__
    assert rep["result"]["verdict"] == "UnconditionallyInseparable"
    assert rep["result"]["certificate_kind"] == "ExactPencil"
    assert rep["config"]["tol"]["rank"] == 1e-9


def test_missing_file_exit_1(capsys):
    code, _, err = run(capsys, "schmidt", "--state", "missing.json")
    assert code == 1 and "ParseError" in err


def test_malformed_json_exit_1(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"d1": 2,\n  "d2": 2,\n  "coeffs": [}')
    code, _, err = run(capsys, "schmidt", "--state", str(p))
    assert code == 1 and "line 3" in err


def test_unknown_command_exit_1(capsys):
    code, _, err = run(capsys, "frobnicate")
    assert code == 1 and "UnknownCommand" in err


def test_precondition_exit_2(capsys, ex3):
    code, _, err = run(capsys, "classify-pair", "--a", ex3[1], "--b", ex3[1])
    assert code == 2 and "PreconditionViolated" in err


def test_unnormalized_state_exit_2(capsys, tmp_path):
    p = tmp_path / "s.json"
    p.write_text(json.dumps({"d1": 1, "d2": 2, "coeffs": [[[1, 0], [1, 0]]]}))
    code, _, _ = run(capsys, "schmidt", "--state", str(p))
    assert code == 2


def test_bad_starts_exit_2(capsys):
    code, _, _ = run(capsys, "bounds-demo", "--starts", "0")
    assert code == 2


def test_tolerance_flags(capsys, ex3):
    code, out, _ = run(capsys, "schmidt", "--state", ex3[0], "--tol-rank", "1e-6", "--tol-norm", "1e-8",
                       "--json")
    cfg = json.loads(out)["config"]
    assert code == 0 and cfg["tol"]["rank"] == 1e-6 and cfg["tol"]["norm"] == 1e-8


def test_text_mode(capsys, ex3):
    code, out, _ = run(capsys, "schmidt", "--state", ex3[0])
    assert code == 0 and "schmidt_rank: 2" in out


def test_ueb_roundtrip(capsys, tmp_path):
    path = tmp_path / "ueb.json"
    code, out, _ = run(capsys, "ueb-build", "--out", str(path), "--json")
    assert code == 0
    basis, d1, d2, extra = jio.subspace_from_json(json.loads(path.read_text()))
    built = json.loads(out)["result"]["candidate"]
    assert built == json.loads(path.read_text())
    from supersep.ueb import build_paper_3ueb

    for a, b in zip(basis, build_paper_3ueb().states):
        assert np.array_equal(a.coeffs, b.coeffs)
    assert verify_r_ueb(UebCandidate(d1, d2, basis, extra["r_claimed"])).theorem3_applies
    code, out, _ = run(capsys, "ueb-verify", "--subspace", str(path), "--identify", "--pes", "0", "--json")
    res = json.loads(out)["result"]
    assert code == 0 and res["report"]["theorem3_applies"]
    assert {c["verdict"] for c in res["identifiability"]} == {"NotIdentifiable"}
    assert res["partially_entangled_subspace"]["deficit"] == 1


def test_ensemble_commands(capsys, tmp_path):
    path = tmp_path / "ens.json"
    code, _, _ = run(capsys, "ensemble-build", "--out", str(path), "--p1", "0.3")
    assert code == 0
    code, out, _ = run(capsys, "ensemble-check", "--ensemble", str(path), "--json")
    res = json.loads(out)["result"]
    assert code == 0 and res["certificate"]["verdict"] == "NotIdentifiable"
    assert res["conclusively_distinguishable"] is False


def test_identify_and_products(capsys, tmp_path):
    b = bell_states()
    p = tmp_path / "set.json"
    p.write_text(jio.dumps(jio.subspace_to_json([b["phi+"], b["phi-"], b["psi+"]], 2, 2)))
    code, out, _ = run(capsys, "identify", "--states", str(p), "--json")
    res = json.loads(out)["result"]
    assert code == 0 and res["all_identifiable"]
    assert all(c["witness"] is not None for c in res["certificates"])
    code, out, _ = run(capsys, "subspace-products", "--subspace", str(p), "--json")
    assert code == 0 and "best_overlap" in json.loads(out)["result"]


def test_pair_commands(capsys, tmp_path):
    e = write_state(tmp_path / "e.json", PureState.from_kets(2, 2, {(0, 0): 2, (1, 1): 1}))
    code, out, _ = run(capsys, "find-orthogonal-product", "--state", e, "--json")
    res = json.loads(out)["result"]
    assert code == 0
    assert res["coeffs"] == pytest.approx([3 / np.sqrt(26), np.sqrt(17 / 26)])
    p = tmp_path / "p.json"
    p.write_text(json.dumps(res["p"]))
    code, out, _ = run(capsys, "product-roots", "--a", e, "--b", str(p), "--json")
    assert code == 0 and len(json.loads(out)["result"]["roots"]) == 2
    code, out, _ = run(capsys, "epsilon-scan", "--e", e, "--p", str(p), "--json")
    res = json.loads(out)["result"]
    assert code == 0 and len(res["points"]) == 99 and res["certificate_kind"] == "Scan"


def test_bounds_demo_command(capsys):
    code, out, _ = run(capsys, "bounds-demo")
    assert code == 0 and "entropy upper bound" in out
    code, out, _ = run(capsys, "bounds-demo", "--json")
    res = json.loads(out)["result"]
    assert res["linden_upper"] == pytest.approx(2.6377, abs=1e-3)
    assert not any(res["detects_separability"].values())


def test_demo_paper(capsys):
    code, out, _ = run(capsys, "demo-paper", "--json")
    res = json.loads(out)["result"]
    assert code == 0
    assert res["example1"]["pencil"]["verdict"] == "ConditionallyInseparable"
    assert res["example2"]["verdict"] == "UnconditionallyInseparable"
    assert res["example3"]["verdict"] == "UnconditionallyInseparable"
    assert res["ueb"]["verdicts"] == ["NotIdentifiable"] * 13
    assert res["more_nonlocal"]["identifiability"]["verdict"] == "NotIdentifiable"
    assert res["more_nonlocal"]["two_element_check"]["verdict"] == "NotIdentifiable"
    assert res["bounds"]["actual_e_psi"] <= 1e-10


def test_deterministic_output(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "demo-paper", "--json", "--seed", "3")
        outs.append(out)
    assert outs[0] == outs[1]
