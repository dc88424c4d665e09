import json

import pytest

from artifact.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_backend(capsys):
    code, out, _ = _run(capsys, "backend")
    assert code == 0 and json.loads(out)["backend"] in ("cython", "python")


def test_ord_infix(capsys, tmp_path):
    code, out, _ = _run(capsys, "ord", "expcurve(1)", "x1^3", "--csv", str(tmp_path))
    assert code == 0
    assert float(json.loads(out)["ord"]) == pytest.approx(3)
    assert (tmp_path / "ord.csv").read_text().startswith("t,ord")


def test_zeros(capsys):
    code, out, _ = _run(capsys, "zeros", "expcurve(1)", "x1^2*x2")
    assert code == 0 and json.loads(out)["count"] == 2


def test_criterion_schedule(capsys):
    code, out, _ = _run(capsys, "criterion", "schedule", "--n", "5", "--k", "1")
    d = json.loads(out)
    assert code == 0 and all(d["chain"].values())
    assert d["schedule"]["a0"] == 4097


def test_criterion_rejects(capsys):
    code, _, err = _run(capsys, "criterion", "schedule", "--n", "4", "--k", "1")
    assert code == 2 and "sqrt" in err


def test_census_logcurve(capsys, tmp_path):
    out_file = tmp_path / "c.json"
    code, out, _ = _run(capsys, "--out", str(out_file), "census", "logcurve", "--T", "4")
    d = json.loads(out)
    assert code == 0 and d["count"] == 4 and d["separated"]
    assert json.loads(out_file.read_text()) == d


def test_census_expcurve_csv(capsys, tmp_path):
    code, out, _ = _run(capsys, "census", "expcurve", "--T", "400", "--csv", str(tmp_path))
    assert code == 0 and json.loads(out)["count"] > 0
    assert (tmp_path / "census_expcurve.csv").exists()


def test_siegel(capsys, tmp_path):
    w = tmp_path / "w.json"
    w.write_text("[0]")
    code, out, _ = _run(capsys, "siegel", "expcurve(1)", str(w), "--N", "4", "--degree-cap", "1")
    d = json.loads(out)
    assert code == 0 and d["report"]["route"] == "numeric"


def test_bad_poly(capsys):
    code, _, err = _run(capsys, "ord", "expcurve(1)", "x3 + 1")
    assert code == 2 and "x3" in err
