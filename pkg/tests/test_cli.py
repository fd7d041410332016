import csv
import json
import os
import subprocess
import sys

import pytest

from relkin import cli


def test_bessel_run_writes_artifacts(tmp_path, capsys):
    code = cli.run(["bessel", "--out", str(tmp_path), "--plot", "--seed", "3"])
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "results.csv")))
    assert rows[0] == ["experiment", "c", "parameter", "value"]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["passed"] is True and summary["experiment"] == "bessel"
    assert "PASS" in capsys.readouterr().out


def test_outputs_bit_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.run(["kernels", "--out", str(tmp_path / d), "--seed", "7",
                        "--config", str(_cfg(tmp_path, "n_pairs = 5\nc_list = [10.0]\n"))]) == 0
    for name in ("results.csv", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def _cfg(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_toml_and_json_configs(tmp_path):
    cfg = _cfg(tmp_path, 'experiment = "basis-limit"\nc_list = [20.0, 40.0]\nn_points = 50\n')
    assert cli.run(["basis-limit", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    j = _cfg(tmp_path, json.dumps({"c_list": [20.0, 40.0]}), "cfg.json")
    assert cli.run(["basis-limit", "--config", str(j), "--out", str(tmp_path / "p")]) == 0
    rows = list(csv.reader(open(tmp_path / "p" / "results.csv")))
    assert {r[1] for r in rows[1:]} == {"20.0", "40.0"}


@pytest.mark.parametrize("text", ["bogus = 1\n", "c_list = \"x\"\nn_points = \"a\"\n", "not toml [", 'experiment = "nu"\n'])
def test_config_errors_exit_2(tmp_path, text):
    cfg = _cfg(tmp_path, text)
    assert cli.run(["basis-limit", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    # a closure with no admissible temperature fails inside the solver
    cfg = _cfg(tmp_path, "T0 = -1.0\n")
    assert cli.run(["nu", "--config", str(cfg), "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_threshold_failure_exit_1(tmp_path):
    cfg = _cfg(tmp_path, "factor = 100.0\nc_list = [20.0, 40.0]\n")
    assert cli.run(["basis-limit", "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_selftest_and_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "relkin.cli", "selftest", "--out", str(tmp_path), "--threads", "1"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert all(v["passed"] for k, v in summary.items() if isinstance(v, dict))


def test_bad_arguments():
    with pytest.raises(SystemExit) as e:
        cli.run(["nonsense"])
    assert e.value.code == 2
    assert cli.run(["bessel", "--seed", "-1"]) == 2


def test_threads_env(monkeypatch):
    monkeypatch.setenv("RELKIN_THREADS", "2")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        monkeypatch.setenv(var, "1")
    cli._set_threads(4)
    assert os.environ["OPENBLAS_NUM_THREADS"] == "2"
