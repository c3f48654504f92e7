import subprocess
import sys

import pytest

from harmonic_qrc.cli import main

CONFIG = """\
task: entangler
N: 2
tau: [1, 2]
dt: 25.132741228718345
phases: {preparation: 5, training: 10, test: 5}
de: {max_generations: 2, population_size: 6}
realizations: 2
seed: 4
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "ent.yaml"
    path.write_text(CONFIG)
    return path


def test_run_and_summarize(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["run", str(config_file), "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "4 results" in text and "tau=1" in text
    assert (out / "results.csv").exists() and (out / "plots" / "box_tau.csv").exists()
    assert main(["summarize", str(out), "--axes", "tau"]) == 0
    assert "box_tau.csv" in capsys.readouterr().out


def test_overrides_rerun_identical(tmp_path, config_file):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(config_file), "--out", str(a), "--seed", "9", "--realizations", "1"]) == 0
    assert main(["run", str(config_file), "--out", str(b), "--seed", "9", "--realizations", "1"]) == 0
    assert (a / "results.csv").read_bytes() == (b / "results.csv").read_bytes()


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.yaml"
    path.write_text("task: stqm\nN: -1\nM: 1\ntau: 1\n")
    assert main(["run", str(path)]) == 2
    assert "field 'N'" in capsys.readouterr().err


def test_summarize_missing(tmp_path, capsys):
    assert main(["summarize", str(tmp_path / "none")]) == 2


def test_baseline(capsys):
    assert main(["baseline", "stqm", "--samples", "2000", "--seed", "1"]) == 0
    value = float(capsys.readouterr().out.split(":")[1].split()[0])
    assert 0.45 < value < 0.6


def test_baseline_rejects_task(capsys):
    assert main(["baseline", "entropy"]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "harmonic_qrc.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for command in ("run", "baseline", "summarize"):
        assert command in out.stdout
