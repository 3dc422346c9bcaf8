import json
import subprocess
import sys

import pytest

from dulac import corpus
from dulac.cli import main


def run(*args):
    return main([str(a) for a in args])


def test_parse_round_trips(tmp_path, capsys):
    out = tmp_path / "p.json"
    assert run("parse", corpus.path("abel_C0"), "--out", out) == 0
    assert out.read_text() == corpus.text("abel_C0")


def test_certify_exit_codes(capsys):
    assert run("certify", corpus.path("abel_C1")) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["m"] == 0 and doc["a"] == ["-2", "1"] and doc["tolerance"] == "0"
    assert run("certify", corpus.path("euler_fail"), "--format", "latex") == 2
    assert "\\begin{tabular}" in capsys.readouterr().out


def test_solve_then_residual(tmp_path, capsys):
    series = tmp_path / "s.json"
    assert run("solve", corpus.path("abel_C1"), "-N", 6, "--out", series) == 0
    assert json.loads(series.read_text())["trunc"] == 8
    code = run("residual", corpus.path("abel_C1"), "--series", series, "--sector", "0.1:6.18", "--rho", 0.05)
    assert code == 0
    assert json.loads(capsys.readouterr().out)["verdict"] == "pass"


def test_reduce_and_majorant(capsys):
    assert run("reduce", corpus.path("abel_C0"), "--format", "text") == 0
    assert "L(xi) = 1*xi^1" in capsys.readouterr().out
    assert run("majorant", corpus.path("painleve6"), "-N", 12, "--epsbar", "1/2") == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["dominated"] and doc["constants"]["sigma"] == "1/4"


def test_report_and_params(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run("report", corpus.path("painleve6"), "-N", 8, "--param", "3=1", "--out", out) == 0
    assert json.loads(out.read_text())["verdict"] == "certified-convergent"
    assert run("report", corpus.path("euler_fail"), "--format", "text") == 2


def test_errors_go_to_stderr(tmp_path, capsys):
    assert run("certify", tmp_path / "missing.json") == 1
    err = capsys.readouterr().err
    assert "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"order": 1, "F": []}')
    assert run("parse", bad) == 1


def test_bad_param_syntax():
    with pytest.raises(SystemExit):
        run("report", corpus.path("painleve6"), "--param", "3")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "dulac.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "dulac" in proc.stdout
