import json

import pytest

from sidlab.cli import main


def test_run_prints_summary(tmp_path, capsys):
    assert main(["run", "--out", str(tmp_path), "--seed", "4"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["route_residual"] < 1e-6
    assert json.loads((tmp_path / "report.json").read_text())["seed"] == 4


def test_check_verb(capsys):
    assert main(["check"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_export_formats(tmp_path):
    assert main(["export", "--format", "csv", "--out", str(tmp_path)]) == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names and all(n.endswith(".csv") for n in names)


def test_stage_flag_and_sweep(tmp_path):
    assert main(["run", "--stage", "evolution", "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert set(rep["stages"]) == {"model", "state", "evolution"}
    assert main(["sweep", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sweep.json").exists()


def test_config_file_and_env(tmp_path, monkeypatch, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("model:\n  name: oscillator\nseed: 2\n")
    monkeypatch.setenv("SIDLAB_SEED", "8")
    assert main(["config", "--config", str(cfg)]) == 0
    out = capsys.readouterr().out
    assert "seed: 8" in out and "name: oscillator" in out


def test_errors_exit_with_status_two(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.yaml")]) == 2
    assert "nope.yaml" in capsys.readouterr().err
    assert main(["run", "--out", str(tmp_path), "--model", "free_translation"]) == 0
    bad = tmp_path / "bad.yaml"
    bad.write_text("sigma: 0.001\n")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == 2
    assert "[classical]" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["frobnicate"])
