import json
import subprocess
import sys

import pytest

from oatune.casestudy import RNN_PUBLISHED, rnn_config
from oatune.cli import main

from conftest import SYNTH_CMD


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def write_config(path, command=SYNTH_CMD + ["--spec", "table4"], **extra):
    doc = rnn_config(command)
    doc.update(extra)
    path.write_text(json.dumps(doc, ensure_ascii=False), encoding="utf-8")
    return str(path)


def test_tables_listing(capsys):
    assert main(["tables", "L9"]) == 0
    out = capsys.readouterr().out
    assert "L9(3^4)" in out and "88.9%" in out


def test_plan_run_analyze_confirm(workdir, capsys):
    cfg = write_config(workdir / "rnn.json")
    assert main(["plan", "--config", cfg, "--run-dir", "run"]) == 0
    assert main(["plan", "--config", cfg, "--run-dir", "run"]) == 0  # idempotent
    assert main(["analyze", "--run-dir", "run"]) == 4
    assert "MissingRows" in capsys.readouterr().err

    assert main(["run", "--run-dir", "run", "--parallelism", "2"]) == 0
    capsys.readouterr()
    assert main(["analyze", "--run-dir", "run"]) == 0
    out = capsys.readouterr().out
    assert "λ > n_l > lr > n_n" in out
    assert "next: oat confirm --run-dir run" in out
    for sums in RNN_PUBLISHED["level_sums"]:
        assert all(f"{s:.3f}" in out for s in sums)
    doc = json.loads((workdir / "run" / "report.doc").read_text(encoding="utf-8"))
    assert doc["best_level"] == [1, 1, 3, 2]

    assert main(["confirm", "--run-dir", "run"]) == 0
    assert "optimum exceeds best tabulated row" in capsys.readouterr().out
    text = (workdir / "run" / "report.txt").read_text(encoding="utf-8")
    assert text.splitlines()[-1].split()[-1] == "1.061"


def test_plan_default_dir_and_mismatch(workdir, capsys):
    cfg = write_config(workdir / "rnn.json")
    assert main(["plan", "--config", cfg]) == 0
    run_dirs = list((workdir / "runs").iterdir())
    assert len(run_dirs) == 1 and len(run_dirs[0].name) == 16
    other = write_config(workdir / "other.json", repetitions=3)
    assert main(["plan", "--config", other, "--run-dir", str(run_dirs[0])]) == 2


def test_config_error_exit_code(workdir, capsys):
    doc = {"schema_version": 1, "factors": [{"name": "a", "levels": [1, 2, 3]}, {"name": "b", "levels": [1, 2]}]}
    (workdir / "bad.json").write_text(json.dumps(doc))
    assert main(["plan", "--config", "bad.json"]) == 2
    assert "UnequalLevelCounts" in capsys.readouterr().err


def test_objective_failure_exit_code(workdir):
    cfg = write_config(workdir / "fail.json", command=[sys.executable, "-c", "import sys; sys.exit(1)"])
    assert main(["plan", "--config", cfg, "--run-dir", "run"]) == 0
    assert main(["run", "--run-dir", "run"]) == 3


def test_budget_exit_code(workdir):
    cfg = write_config(workdir / "rnn.json")
    assert main(["compare", "--config", cfg, "--budget", "10"]) == 5


def test_compare_command(workdir, capsys):
    cfg = write_config(workdir / "rnn.json")
    assert main(["compare", "--config", cfg, "--run-dir", "cmp", "--parallelism", "4"]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert lines[0].split()[:1] == ["Method"]
    grid = next(ln for ln in lines if ln.startswith("Grid")).split()
    oatm = next(ln for ln in lines if ln.startswith("OATM")).split()
    assert grid[5] == "81" and oatm[5] == "10"
    assert (workdir / "cmp" / "report.doc").exists()


def test_missing_run_dir(workdir, capsys):
    assert main(["run", "--run-dir", "nowhere"]) == 2


def test_console_scripts_installed():
    out = subprocess.run([sys.executable, "-m", "oatune.cli", "tables", "L8"], capture_output=True, text=True)
    assert out.returncode == 0 and "L8(2^7)" in out.stdout
