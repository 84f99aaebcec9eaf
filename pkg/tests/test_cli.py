"""End-to-end command line runs: exit codes, artifacts, determinism."""

import json
import subprocess
import sys

import numpy as np
import pytest

from roughstart.cli import main


def run(args, tmp_path, config_text=None):
    argv = list(args) + ["--out", str(tmp_path)]
    if config_text is not None:
        cfg = tmp_path / "config.toml"
        cfg.write_text(config_text)
        argv += ["--config", str(cfg)]
    return main(argv)


def test_classify_writes_table(tmp_path, capsys):
    assert run(["classify"], tmp_path) == 0
    rows = json.loads((tmp_path / "classify.json").read_text())
    kinds = [r["equation"] for r in rows]
    assert kinds == ["surface_growth", "kpz", "ks", "reaction_diffusion"]
    out = capsys.readouterr().out
    assert "critical_space" in out
    assert (tmp_path / "manifest.json").exists()


def test_classify_extra_equation(tmp_path):
    toml = '[equation]\nkind = "burgers"\ntheta = 0.5\n'
    assert run(["classify"], tmp_path, toml) == 0
    rows = json.loads((tmp_path / "classify.json").read_text())
    assert rows[-1]["equation"] == "burgers"


def test_sample_deterministic(tmp_path):
    toml = "[ic]\ntheta = 0.5\nN = 16\nseed = 11\n"
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        d.mkdir()
        cfg = d / "c.toml"
        cfg.write_text(toml)
        assert main(["sample", "--config", str(cfg), "--out", str(d)]) == 0
    assert (a / "sample.json").read_text() == (b / "sample.json").read_text()


def test_sample_seed_override_changes_output(tmp_path):
    toml = "[ic]\ntheta = 0.5\nN = 16\nseed = 11\n"
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d, extra in ((a, []), (b, ["--seed", "12"])):
        d.mkdir()
        cfg = d / "c.toml"
        cfg.write_text(toml)
        assert main(["sample", "--config", str(cfg), "--out", str(d)] + extra) == 0
    assert (a / "sample.json").read_text() != (b / "sample.json").read_text()


def test_sample_missing_section_exits_2(tmp_path):
    assert run(["sample"], tmp_path, "[solver]\nT = 0.1\n") == 2


def test_sample_missing_seed_exits_2(tmp_path):
    assert run(["sample"], tmp_path, "[ic]\ntheta = 0.5\n") == 2


def test_bad_toml_exits_2(tmp_path):
    assert run(["classify"], tmp_path, "not [ valid toml ===\n") == 2


def test_bad_ic_dimension_exits_2(tmp_path):
    assert run(["sample"], tmp_path, "[ic]\ntheta = 0.5\nd = 3\nseed = 1\n") == 2


def test_probe_runs_and_reports(tmp_path, capsys):
    toml = (
        "[ic]\ntheta = 0.5\nN = 32\nseed = 3\n"
        '[equation]\nkind = "burgers"\n'
        "[probe]\njs = [2, 3]\nts = [0.002, 0.01]\nsamples = 60\nfit_block = 2\n"
    )
    assert run(["probe"], tmp_path, toml) == 0
    verdict = json.loads((tmp_path / "probe_verdict.json").read_text())
    assert {"alpha", "beta_hat", "beta0", "pass"} <= set(verdict)
    lines = (tmp_path / "probe.csv").read_text().strip().splitlines()
    assert lines[0] == "t,j,exact_moment,mc_mean,mc_stderr"
    assert len(lines) == 1 + 4


def test_solve_fix1_sine_success(tmp_path):
    toml = (
        '[equation]\nkind = "burgers"\n'
        "[solver]\nformulation = \"fix1\"\nT = 0.05\nN = 16\nn_steps = 48\ntol = 1e-8\n"
    )
    assert run(["solve"], tmp_path, toml) == 0
    summary = json.loads((tmp_path / "solve.json").read_text())
    assert summary["converged"] is True
    iterates = (tmp_path / "iterates.csv").read_text().strip().splitlines()
    assert iterates[0] == "iteration,weighted_norm"
    assert len(iterates) >= 3


def test_solve_weight_window_violation_exits_2(tmp_path):
    # fix1 needs beta < delta; Burgers delta = 3/4
    toml = (
        '[equation]\nkind = "burgers"\n'
        "[solver]\nformulation = \"fix1\"\nT = 0.05\nbeta = 0.9\n"
    )
    assert run(["solve"], tmp_path, toml) == 2


def test_solve_unknown_formulation_exits_2(tmp_path):
    toml = '[equation]\nkind = "burgers"\n[solver]\nformulation = "fix9"\n'
    assert run(["solve"], tmp_path, toml) == 2


def test_solve_nonconvergence_exits_3(tmp_path):
    # rough data on the KS flow at a horizon where the direct iteration
    # does not contract
    toml = (
        "[ic]\ntheta = 1.2\nN = 32\nseed = 42\n"
        '[equation]\nkind = "ks"\n'
        "[solver]\nformulation = \"fix1\"\nT = 0.01\nn_steps = 48\n"
        "beta = 0.45\ntol = 1e-8\nmax_iter = 30\nmax_halvings = 0\n"
    )
    assert run(["solve"], tmp_path, toml) == 3
    summary = json.loads((tmp_path / "solve.json").read_text())
    assert summary["converged"] is False


def test_blowup_artifacts(tmp_path):
    toml = (
        "[blowup]\nregime = \"tail_bounded\"\nK_max = 40\nlambda = 2.0\n"
        "epsilon = 0.2\nseed = 5\nsamples = 50\nepsilon_grid = [0.1, 0.2]\n"
    )
    assert run(["blowup"], tmp_path, toml) == 0
    verdict = json.loads((tmp_path / "blowup_verdict.json").read_text())
    assert verdict["regime"] == "tail_bounded"
    assert "tail_bound" in verdict
    lines = (tmp_path / "blowup_modes.csv").read_text().strip().splitlines()
    assert len(lines) == 1 + 40


def test_blowup_bad_lambda_exits_2(tmp_path):
    toml = "[blowup]\nregime = \"tail_bounded\"\nlambda = 1.0\nseed = 1\n"
    assert run(["blowup"], tmp_path, toml) == 2


def test_asymptotics_defaults(tmp_path):
    assert run(["asymptotics"], tmp_path) == 0
    results = json.loads((tmp_path / "asymptotics.json").read_text())
    assert len(results) == 3
    for r in results:
        assert np.isfinite(r["sup_ratio"])
        assert abs(r["loglog_slope"] - r["expected_slope"]) < 0.02


def test_manifest_records_threads(tmp_path, monkeypatch):
    monkeypatch.setenv("ROUGHSTART_THREADS", "2")
    assert run(["classify"], tmp_path) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["threads"] == "2"
    assert manifest["command"] == "classify"
    assert "roughstart" in manifest["versions"]


def test_threads_flag_sets_env(tmp_path, monkeypatch):
    monkeypatch.delenv("ROUGHSTART_THREADS", raising=False)
    assert main(["classify", "--out", str(tmp_path), "--threads", "3"]) == 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert manifest["threads"] == "3"


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "roughstart.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "classify" in proc.stdout
