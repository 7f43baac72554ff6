"""End-to-end CLI checks through real subprocesses."""

import subprocess
import sys

import pytest

CFG_TEXT = """\
n_gen = 240
n_dup = 80
n_sims = 2
n_datasets = 2
n_mc = 400
rounds = 6
"""


def run_cli(*args, cwd):
    return subprocess.run(
        [sys.executable, "-m", "stratcv", *args],
        cwd=cwd,
        capture_output=True,
        text=True,
        timeout=300,
    )


@pytest.fixture
def cfg_file(tmp_path):
    path = tmp_path / "tiny.cfg"
    path.write_text(CFG_TEXT)
    return path


def test_oracle_writes_file_and_stdout(tmp_path, cfg_file):
    res = run_cli("oracle", "--config", str(cfg_file), "--out", "o", cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    line = (tmp_path / "o" / "oracle.txt").read_text().strip()
    assert line.startswith("optimal_accuracy,")
    assert line == res.stdout.strip()
    assert 0.5 <= float(line.split(",")[1]) <= 1.0


def test_seed_changes_oracle(tmp_path, cfg_file):
    a = run_cli("oracle", "--config", str(cfg_file), "--seed", "1", "--out", "a", cwd=tmp_path)
    b = run_cli("oracle", "--config", str(cfg_file), "--seed", "2", "--out", "b", cwd=tmp_path)
    assert a.returncode == 0 and b.returncode == 0
    assert (tmp_path / "a" / "oracle.txt").read_text() != (tmp_path / "b" / "oracle.txt").read_text()


def test_gen_then_audit(tmp_path, cfg_file):
    res = run_cli("gen", "--config", str(cfg_file), "--out", "g", cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    g = tmp_path / "g"
    res = run_cli(
        "audit",
        "--dataset", str(g / "dataset.csv"),
        "--folds", str(g / "folds_stratified_x1.csv"),
        "--out", "g",
        cwd=tmp_path,
    )
    assert res.returncode == 0, res.stderr
    report = (g / "audit_report.txt").read_text()
    assert "def1: satisfied" in report
    assert "def2: violated" in report
    assert "def3: satisfied" in report
    assert report.strip() == res.stdout.strip()

    res = run_cli(
        "audit",
        "--dataset", str(g / "dataset.csv"),
        "--folds", str(g / "folds_random.csv"),
        "--out", "g2",
        cwd=tmp_path,
    )
    assert "def3: violated" in res.stdout


def test_audit_requires_dataset(tmp_path):
    res = run_cli("audit", cwd=tmp_path)
    assert res.returncode == 2  # argparse usage error


def test_fig2_runs_and_is_deterministic(tmp_path, cfg_file):
    a = run_cli("fig2", "--config", str(cfg_file), "--out", "a", cwd=tmp_path)
    b = run_cli("fig2", "--config", str(cfg_file), "--out", "b", cwd=tmp_path)
    assert a.returncode == 0, a.stderr
    assert b.returncode == 0
    fa = (tmp_path / "a" / "fig2.csv").read_bytes()
    fb = (tmp_path / "b" / "fig2.csv").read_bytes()
    assert fa == fb
    assert fa.decode().splitlines()[0] == "iteration,strategy,phase,accuracy"


def test_fig3_threads_do_not_change_bytes(tmp_path, cfg_file):
    a = run_cli("fig3", "--config", str(cfg_file), "--threads", "1", "--out", "a", cwd=tmp_path)
    b = run_cli("fig3", "--config", str(cfg_file), "--threads", "2", "--out", "b", cwd=tmp_path)
    assert a.returncode == 0, a.stderr
    assert b.returncode == 0, b.stderr
    assert (tmp_path / "a" / "fig3.csv").read_bytes() == (tmp_path / "b" / "fig3.csv").read_bytes()


def test_fig4_outputs_summary(tmp_path, cfg_file):
    res = run_cli("fig4", "--config", str(cfg_file), "--threads", "2", "--out", "f", cwd=tmp_path)
    assert res.returncode == 0, res.stderr
    lines = (tmp_path / "f" / "fig4.csv").read_text().splitlines()
    assert lines[0] == "dataset,covariate,importance,accuracy_ratio"
    assert len(lines) == 1 + 2 * 10
    summary = (tmp_path / "f" / "fig4_summary.csv").read_text().splitlines()
    assert summary[0] == "pearson_r"
    assert -1.0 <= float(summary[1]) <= 1.0
    assert "pearson_r" in res.stdout


def test_scale_flag(tmp_path, cfg_file):
    res = run_cli(
        "fig3", "--config", str(cfg_file), "--scale", "0.5", "--out", "s", cwd=tmp_path
    )
    assert res.returncode == 0, res.stderr
    lines = (tmp_path / "s" / "fig3.csv").read_text().splitlines()
    assert len(lines) == 1 + 1 * 12  # n_sims 2 -> 1


def test_unknown_config_key_fails(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    res = run_cli("oracle", "--config", str(bad), cwd=tmp_path)
    assert res.returncode == 1
    assert "error:" in res.stderr and "nonsense" in res.stderr


def test_invalid_scale_fails(tmp_path, cfg_file):
    res = run_cli("oracle", "--config", str(cfg_file), "--scale", "0", cwd=tmp_path)
    assert res.returncode == 1
    assert "error:" in res.stderr


def test_missing_subcommand_fails(tmp_path):
    res = run_cli(cwd=tmp_path)
    assert res.returncode == 2
