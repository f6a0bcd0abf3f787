import json

import numpy as np
import pytest

from lognormlab.cli import build_parser, run

A_JSON = "[[-2, 1], [0, -3]]"


def out_json(capsys):
    return json.loads(capsys.readouterr().out)


def test_lognorm_linf(tmp_path, capsys):
    f = tmp_path / "A.json"
    f.write_text(A_JSON)
    assert run(["lognorm", "--norm", '{"kind":"linf"}', "--matrix", str(f)]) == 0
    d = out_json(capsys)
    assert d["value"] == -1 and d["method"] == "closed_form"


def test_lognorm_with_oracle(capsys):
    assert run(["lognorm", "--norm", '{"kind":"l1"}', "--matrix", A_JSON, "--oracle"]) == 0
    d = out_json(capsys)
    assert d["value"] == -2
    assert abs(d["oracle"] + 2) < 1e-6


def test_regularity_negative_control(capsys):
    code = run(["regularity", "--pairing", '{"kind":"abssum"}', "--samples", "1000", "--seed", "7"])
    assert code == 1
    d = out_json(capsys)
    sa = d["checks"]["straight_angle"]
    assert not sa["pass"] and sa["counterexample"] is not None


def test_regularity_text_lists_counterexample(capsys):
    run(["regularity", "--pairing", '{"kind":"abssum"}', "--samples", "500", "--format", "text"])
    assert "counterexample straight_angle" in capsys.readouterr().out


def test_polylp_identity(tmp_path, capsys):
    W, A = tmp_path / "W.json", tmp_path / "A.json"
    W.write_text("[[1, 0], [0, 1]]")
    A.write_text(A_JSON)
    lp_out = tmp_path / "lp.json"
    assert run(["polylp", "--W", str(W), "--A", str(A), "--export-lp", str(lp_out)]) == 0
    d = out_json(capsys)
    assert abs(d["gamma"] + 1) < 1e-9
    assert d["variables"] == 7
    assert set(json.loads(lp_out.read_text())) >= {"c", "Aeq", "beq", "Aub", "bub", "bounds"}


def test_norm_and_pairing(capsys):
    assert run(["norm", "--norm", '{"kind":"poly","W":[[1,1],[1,-1]]}', "--x", "[3,-4]"]) == 0
    assert out_json(capsys)["value"] == 7
    assert run(["pairing", "--pairing", '{"kind":"sign"}', "--x", "[1,-2]", "--y", "[3,-3]"]) == 0
    assert out_json(capsys)["value"] == 18


def test_contract_exit_codes(capsys):
    good = ["contract", "--system", '{"kind":"linear","A":[[-2,1],[0,-3]]}', "--norm", '{"kind":"linf"}',
            "--x0", "[1,1]", "--y0", "[0,0]", "--b", "-1"]
    assert run(good) == 0
    capsys.readouterr()
    bad = ["contract", "--system", '{"kind":"linear","A":[[0,2],[0,0]]}', "--norm", '{"kind":"linf"}',
           "--x0", "[1,1]", "--y0", "[0,0]", "--b", "-1"]
    assert run(bad) == 1
    assert not out_json(capsys)["records"]["envelope"]["pass"]


def test_parse_error_location(capsys):
    assert run(["norm", "--norm", '{"kind": "l1",', "--x", "[1]"]) == 2
    err = capsys.readouterr().err
    assert "line 1" in err and "column" in err


def test_spec_error_exit_2(capsys):
    assert run(["norm", "--norm", '{"kind":"lp","p":1}', "--x", "[1,2]"]) == 2


def test_missing_argument(capsys):
    assert run(["norm", "--x", "[1]"]) == 2


def test_json_is_deterministic(tmp_path):
    args = ["regularity", "--pairing", '{"kind":"combo","alpha":0.5}', "--samples", "300", "--seed", "3"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    run(args + ["--out", str(a)])
    run(args + ["--out", str(b)])
    assert a.read_bytes() == b.read_bytes()


def test_selftest_subset(capsys, monkeypatch):
    monkeypatch.setenv("LOGNORMLAB_THREADS", "1")
    assert run(["selftest", "--only", "9", "--format", "text"]) == 0
    assert capsys.readouterr().out.startswith("[PASS]  9")


@pytest.mark.parametrize("cmd,phrase", [("regularity", "Characterization Theorem"),
                                        ("lognorm", "Lumer's property"),
                                        ("contract", "Contraction Criteria")])
def test_help_names_results(cmd, phrase):
    sub = build_parser()._subparsers._group_actions[0].choices[cmd]
    assert phrase in " ".join(sub.description.split())


def test_nonfinite_values_are_strings(capsys):
    from lognormlab.cli import _clean
    assert _clean({"a": np.inf, "b": [np.float64(1.5)]}) == {"a": "inf", "b": [1.5]}
