import csv
import json

import numpy as np
import pytest

from carnot.cli import main


@pytest.fixture()
def heis_file(tmp_path):
    path = tmp_path / "heis1.json"
    path.write_text(json.dumps(
        {"m": 2, "n": 1, "B": [[0.0, 1.0, -1.0, 0.0]], "epsilon": 1.0}))
    return str(path)


@pytest.fixture()
def phi_file(tmp_path):
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(
        {"kind": "expr", "domain": {"lo": [-4.0, -4.0], "hi": [4.0, 4.0]},
         "expr": "x2"}))
    return str(path)


@pytest.fixture()
def w_one_file(tmp_path):
    path = tmp_path / "w.json"
    path.write_text(json.dumps(
        {"kind": "expr", "domain": {"lo": [-4.0, -4.0], "hi": [4.0, 4.0]},
         "expr": "1"}))
    return str(path)


def test_group_validate(heis_file, capsys):
    assert main(["group", "validate", heis_file]) == 0
    out = capsys.readouterr().out
    assert "m: 2" in out
    assert "homogeneous_dimension: 4" in out


def test_group_validate_rejects_bad_file(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"m": 2, "n": 1,
                               "B": [[0.0, 1.0, 1.0, 0.0]], "epsilon": 1.0}))
    assert main(["group", "validate", str(bad)]) == 1
    assert "skew" in capsys.readouterr().err


def test_group_missing_field(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"m": 2, "n": 1}))
    assert main(["group", "validate", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "B" in err


def test_gradient_command(heis_file, phi_file, capsys):
    code = main(["gradient", "--group", heis_file, "--phi", phi_file,
                 "--at", "0.3,0.2", "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["gradient"] == pytest.approx([1.0])


def test_residual_command(heis_file, phi_file, w_one_file, capsys):
    code = main(["residual", "--group", heis_file, "--phi", phi_file,
                 "--w", w_one_file, "--zeta", "0,0,1.5", "--grid", "128",
                 "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert abs(report["residual"][0]) < 1e-3


def test_lipschitz_command(heis_file, phi_file, capsys):
    code = main(["lipschitz", "--group", heis_file, "--phi", phi_file,
                 "--pairs", "2000", "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert 0.0 < report["lipschitz_estimate"] <= 1.0 + 1e-9


def test_characteristics_command(heis_file, phi_file, tmp_path, capsys):
    out_csv = tmp_path / "curve.csv"
    code = main(["characteristics", "--group", heis_file, "--phi", phi_file,
                 "--j", "2", "--from", "0,0.25", "--T", "1", "--steps", "200",
                 "--out", str(out_csv), "--json"])
    assert code == 0
    with open(out_csv) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "gamma_1", "phi"]
    assert len(rows) == 202
    t_last = float(rows[-1][0])
    gamma_last = float(rows[-1][1])
    assert gamma_last == pytest.approx(0.25 - t_last ** 2 / 2.0, abs=1e-9)


def test_broadstar_command(heis_file, phi_file, w_one_file, capsys):
    code = main(["broadstar", "--group", heis_file, "--phi", phi_file,
                 "--w", w_one_file, "--j", "2", "--from", "0,0.25",
                 "--T", "1", "--steps", "500", "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["broadstar_residual"] <= 1e-8


def test_area_command(heis_file, tmp_path, capsys):
    phi = tmp_path / "phi_unit.json"
    phi.write_text(json.dumps(
        {"kind": "expr", "domain": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]},
         "expr": "x2"}))
    out = tmp_path / "report.json"
    code = main(["area", "--group", heis_file, "--phi", str(phi),
                 "--grid", "32", "--out", str(out), "--json"])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["area_integral"] == pytest.approx(np.sqrt(2.0), abs=1e-10)
    assert report["estimated_order"] is None or report["estimated_order"] > 1.5


def test_cone_command(heis_file, phi_file, capsys):
    code = main(["cone", "--group", heis_file, "--phi", phi_file,
                 "--samples", "2000", "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["violations"] == 0


def test_characteristics_numerical_failure_exit(heis_file, tmp_path, capsys):
    # start point on the domain edge heading out: numerical failure, exit 2
    phi = tmp_path / "phi_small.json"
    phi.write_text(json.dumps(
        {"kind": "expr", "domain": {"lo": [-0.5, -0.5], "hi": [0.5, 0.5]},
         "expr": "x2"}))
    code = main(["characteristics", "--group", heis_file, "--phi", str(phi),
                 "--j", "2", "--from", "0.5,0.0", "--T", "1", "--steps", "64"])
    assert code == 2
    assert "numerical failure" in capsys.readouterr().err


def test_mollify_command_small(heis_file, tmp_path, capsys):
    phi = tmp_path / "phi_unit.json"
    phi.write_text(json.dumps(
        {"kind": "expr", "domain": {"lo": [0.0, 0.0], "hi": [1.0, 1.0]},
         "expr": "x2"}))
    code = main(["mollify", "--group", heis_file, "--phi", str(phi),
                 "--alphas", "0.2,0.1", "--c", "0.45", "--grid", "4", "--json"])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["passed"] is True
    assert len(report["rows"]) == 2


def test_determinism_byte_identical(heis_file, phi_file, tmp_path):
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    for out in (out1, out2):
        assert main(["lipschitz", "--group", heis_file, "--phi", phi_file,
                     "--pairs", "1000", "--seed", "7", "--out", str(out)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_inputs_never_mutated(heis_file, phi_file, tmp_path):
    import pathlib
    before = (pathlib.Path(heis_file).read_bytes(),
              pathlib.Path(phi_file).read_bytes())
    main(["gradient", "--group", heis_file, "--phi", phi_file, "--at", "0,0"])
    main(["lipschitz", "--group", heis_file, "--phi", phi_file,
          "--pairs", "500", "--out", str(tmp_path / "r.json")])
    after = (pathlib.Path(heis_file).read_bytes(),
             pathlib.Path(phi_file).read_bytes())
    assert before == after


def test_suite_empty(tmp_path, capsys):
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"scenarios": []}))
    assert main(["suite", str(cfg)]) == 0
    assert "0 failing of 0" in capsys.readouterr().out


def test_bundled_demo_suite(monkeypatch, capsys):
    import pathlib
    root = pathlib.Path(__file__).resolve().parents[1]
    if not (root / "data" / "suite.json").exists():
        pytest.skip("demo data not present")
    monkeypatch.chdir(root)
    assert main(["suite", "data/suite.json"]) == 0
    assert "0 failing of 3" in capsys.readouterr().out


def test_suite_pass_and_fail(tmp_path, heis_file, phi_file, w_one_file, capsys):
    cfg = tmp_path / "suite.json"
    cfg.write_text(json.dumps({"scenarios": [
        {"name": "broadstar-linear", "command": "broadstar",
         "args": ["--group", heis_file, "--phi", phi_file, "--w", w_one_file,
                  "--j", "2", "--from", "0,0.25", "--T", "1", "--steps", "200"],
         "expect": {"broadstar_residual": {"value": 0.0, "tol": 1e-8}}},
        {"name": "gradient-wrong-expect", "command": "gradient",
         "args": ["--group", heis_file, "--phi", phi_file, "--at", "0,0"],
         "expect": {"seed": {"value": 5.0, "tol": 0.0}}},
    ]}))
    code = main(["suite", str(cfg)])
    out = capsys.readouterr().out
    assert code == 1
    assert "broadstar-linear" in out and "PASS" in out
    assert "gradient-wrong-expect" in out and "FAIL" in out
    assert "1 failing of 2" in out
