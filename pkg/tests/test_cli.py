import json
import math
import subprocess
import sys

import pytest

from heckebench.cli import dumps, format_float, main


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_optimize_grc(capsys):
    rc, out, _ = run(capsys, "optimize", "--delta1", "grc")
    assert rc == 0
    doc = json.loads(out)
    assert doc["alphaStar"] == pytest.approx(math.sqrt(4 / 3) - 1, rel=1e-14)
    assert doc["L"] == pytest.approx(2 * math.sqrt(3) - 3.5, rel=1e-14)
    assert doc["minusL"]["precisionBits"] == 256
    assert doc["minusL"]["decimal"].startswith("0.0358983848622454")
    assert doc["gridCheck"] is True


def test_optimize_small_delta1_extended(capsys):
    rc, out, _ = run(capsys, "optimize", "--delta1", "soundararajan-thorner")
    assert rc == 0
    minus_l = json.loads(out)["minusL"]["decimal"]
    assert float(minus_l) == pytest.approx(1.19209e-41, rel=1e-5)
    assert len(minus_l.replace(".", "").replace("e-41", "")) > 60


def test_eigen_short_table(capsys):
    rc, out, _ = run(capsys, "eigen", "--weight", "12", "--nmax", "10")
    assert rc == 0
    doc = json.loads(out)
    (form,) = doc["forms"]
    lam = form["lambda"]
    assert len(lam) == 10
    assert lam["2"] == pytest.approx(-24 / 2 ** 5.5, rel=1e-13)


@pytest.mark.parametrize("argv", [
    ["optimize"],
    ["optimize", "--delta1", "nonsense"],
    ["optimize", "--delta1", "1.5"],
    ["unfold-check", "--weight", "12", "--s", "3"],
    ["unfold-check", "--weight", "12", "--m", "0"],
    ["eigen", "--weight", "14"],
    ["mertens", "--delta", "3"],
    ["decor-scan", "--weights", "40:24:4"],
    ["bounds", "--weight", "12", "--pair", "1"],
    ["inner", "--weight", "24", "--f", "3", "--g", "1"],
    ["no-such-command"],
])
def test_usage_errors_exit_2(capsys, argv):
    rc, _, _ = run(capsys, *argv)
    assert rc == 2


def test_bad_thread_env_exits_2(capsys, monkeypatch):
    monkeypatch.setenv("HECKEBENCH_THREADS", "zero")
    rc, _, err = run(capsys, "optimize", "--delta1", "grc")
    assert rc == 2 and "HECKEBENCH_THREADS" in err


def test_deterministic_output_and_manifest(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["optimize", "--delta1", "0.25", "--out", str(a)]) == 0
    assert main(["optimize", "--delta1", "0.25", "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    ma = json.loads((tmp_path / "a.json.manifest.json").read_text())
    mb = json.loads((tmp_path / "b.json.manifest.json").read_text())
    assert ma["id"] == mb["id"] == json.loads(a.read_text())["manifest"]
    assert ma["parameters"] == {"bits": 256, "command": "optimize", "delta1": "0.25"}
    assert set(ma["timing"]) == {"wallSeconds", "finishedAt", "threads"}


def test_mertens_degenerate_note(capsys):
    rc, out, _ = run(capsys, "mertens", "--delta", "2")
    assert rc == 0
    assert "note" in json.loads(out)


def test_decor_scan_csv(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("HECKEBENCH_THREADS", "1")
    out = tmp_path / "scan.csv"
    rc, stdout, _ = run(capsys, "decor-scan", "--weights", "24:28:4", "--out", str(out))
    assert rc == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "k,i,j,reInner,imInner,absInner,soundProduct,holoProduct,quadErr"
    assert len(lines) == 1 + 2          # one pair each at k = 24 and k = 28
    assert "skipped" in json.loads(stdout)["fit"]


def test_selftest_subset(capsys):
    rc, out, err = run(capsys, "selftest", "--only", "1,9")
    assert rc == 0
    assert err.count("[PASS]") == 2
    assert json.loads(out)["passed"] is True


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "heckebench.cli", "optimize", "--delta1", "0"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["L"] == 0


def test_float_formatting():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(float("nan")) == "null"
    assert dumps({"b": 1.0, "a": [0.5]}) == '{\n  "a": [\n    0.5\n  ],\n  "b": 1\n}'
    assert json.loads(dumps({"z": 1 / 3}))["z"] == 1 / 3


def test_inner_constant_weight_orthogonal_pair(capsys):
    rc, out, _ = run(capsys, "inner", "--weight", "24", "--f", "1", "--g", "2", "--constant")
    assert rc == 0
    inner = json.loads(out)["inner"]
    assert abs(complex(inner["value"]["re"], inner["value"]["im"])) < 1e-10
    assert inner["error"] < 1e-10
