import json

import pytest

from endoatlas.cli import run
from endoatlas.matgrp import GroupSpec
from endoatlas.pstruct import sylow_subgroup


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tt_example(capsys):
    code, out, _ = _run(capsys, "tt", "3", "2", "7", "--type", "SL")
    d = json.loads(out)
    assert code == 0 and d["schema"] == 1
    assert d["case_tag"] == "1.2(d)(i)" and d["torsion"] == [6]


def test_tt_text_and_det_order(capsys):
    code, out, _ = _run(capsys, "--output", "text", "tt", "1", "5", "2", "--det-order", "4")
    assert code == 0 and "warning" in out


def test_tt_p_divides_q(capsys):
    code, _, err = _run(capsys, "tt", "2", "3", "3")
    assert code == 1 and "HypothesisError" in err


def test_tt_no_closed_form(capsys):
    assert _run(capsys, "tt", "3", "4", "3")[0] == 1


def test_cosets_example(capsys):
    code, out, _ = _run(capsys, "cosets", "3", "2", "--lemma", "9.4")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    count = next(c for c in d["checks"] if c["check_id"] == "count")
    assert count["witness"]["count"] == 2


def test_structure_section7(capsys):
    code, out, _ = _run(capsys, "structure", "10", "2", "31", "--check", "section7")
    d = json.loads(out)
    assert code == 0 and d["pass"]
    assert any(c["check_id"] == "swap_conjugation_identity" and c["pass"]
               for c in d["checks"])


def test_structure_other_checks(capsys):
    for argv in (["structure", "2", "5", "3", "--check", "glebasics"],
                 ["structure", "3", "4", "5", "--check", "torus-commutator"],
                 ["structure", "3", "4", "3", "--check", "weyl-ab"],
                 ["structure", "4", "4", "5", "--check", "sylow"],
                 ["structure", "4", "4", "5", "--check", "ep"]):
        assert _run(capsys, *argv)[0] == 0, argv


def test_size_cap_exit(capsys):
    code, _, err = _run(capsys, "--max-enumerate", "100", "balmer", "2", "5", "5")
    assert code == 2 and "SizeCapError" in err


def test_verification_failure_exit(capsys):
    code, out, _ = _run(capsys, "selftest", "--only", "3")
    assert code == 3 and json.loads(out)["pass"] is False


def test_inconsistency_exit(capsys):
    code, out, _ = _run(capsys, "validate", "2", "5", "5")
    assert code == 4
    assert not json.loads(out)["pass"]


def test_validate_passes(capsys):
    assert _run(capsys, "validate", "2", "4", "3")[0] == 0


@pytest.mark.parametrize("argv", [[], ["tt", "2", "4"], ["tt", "x", "4", "3"],
                                  ["cosets", "3", "2", "--lemma", "9.2"],
                                  ["tt", "2", "4", "4"], ["frobnicate"]])
def test_usage_errors(capsys, argv):
    assert _run(capsys, *argv)[0] == 64


def test_balmer_output(capsys):
    code, out, _ = _run(capsys, "balmer", "2", "4", "3", "--certificate", "prop55",
                        "--certificate", "cor57")
    d = json.loads(out)
    assert code == 0 and d["solution"]["A"]["torsion"] == [2]
    assert [c["status"] for c in d["certificates"]] == ["inconclusive", "inconclusive"]


def test_balmer_structural(capsys):
    code, out, _ = _run(capsys, "balmer", "5", "4", "5", "--subgroup", "lower-sl", "--structural")
    assert code == 0 and json.loads(out)["certificates"][0]["status"] == "trivial"


def test_balmer_export_and_modes(capsys):
    _, full, _ = _run(capsys, "balmer", "3", "2", "7", "--mode", "full", "--export-presentation")
    _, red, _ = _run(capsys, "balmer", "3", "2", "7", "--mode", "reduced")
    f, r = json.loads(full), json.loads(red)
    assert isinstance(f["presentation"]["relations"], list)
    assert f["solution"]["A"] == r["solution"]["A"]


def test_balmer_custom_file(capsys, tmp_path):
    G = GroupSpec.sl(2, 4)
    S = sylow_subgroup(G, 3)
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"generators": [g.hex() for g in S.gens]}))
    code, out, _ = _run(capsys, "balmer", "2", "4", "3", "--subgroup", "custom-file",
                        "--file", str(path))
    assert code == 0 and json.loads(out)["solution"]["A"]["torsion"] == [2]
    assert _run(capsys, "balmer", "2", "4", "3", "--subgroup", "custom-file")[0] == 64


def test_worker_determinism(capsys):
    argv = ["balmer", "3", "2", "7", "--mode", "sampled", "--samples", "500", "--seed", "3"]
    _, a, _ = _run(capsys, "--workers", "1", *argv)
    _, b, _ = _run(capsys, "--workers", "4", *argv)
    assert a == b


def test_list_checks(capsys):
    code, out, _ = _run(capsys, "--list-checks")
    assert code == 0
    for cid in ("glebasics", "section7", "coset-9.5", "lemma33"):
        assert cid in out
