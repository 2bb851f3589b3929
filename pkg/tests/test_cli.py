"""Command-line interface: configs, determinism, manifests, exit codes."""

import json

import pytest

from mbpure.cli import main


def _write(path, payload):
    path.write_text(json.dumps(payload))
    return str(path)


def test_patterns_prints_rows(capsys):
    assert main(["patterns", "--code", "repetition3"]) == 0
    out = capsys.readouterr().out
    assert "III -> I" in out
    assert len(out.strip().splitlines()) == 16


def test_run_writes_csv_and_manifest(tmp_path):
    cfg = _write(tmp_path / "cfg.json", {
        "experiment": "decode-only",
        "params": {"code": "repetition-phaseflip-3", "grid": [0.97, 0.99],
                   "final_steps": ["P1", "P2"]},
        "output": str(tmp_path / "out.csv"),
        "seed": 1,
    })
    assert main(["run", cfg]) == 0
    text = (tmp_path / "out.csv").read_text()
    assert text.startswith("# fidelity convention")
    assert "gate_param,final_step,jam_fidelity" in text
    assert len([ln for ln in text.splitlines() if not ln.startswith("#")]) == 5
    manifest = json.loads((tmp_path / "out.csv.manifest.json").read_text())
    assert manifest["rows"] == 4
    assert manifest["seed"] == 1
    assert len(manifest["config_sha256"]) == 64


def test_run_is_byte_deterministic(tmp_path):
    payload = {
        "experiment": "patterns",
        "params": {"code": "cluster-ring"},
        "output": str(tmp_path / "pat.csv"),
    }
    cfg = _write(tmp_path / "cfg.json", payload)
    assert main(["run", cfg]) == 0
    first = (tmp_path / "pat.csv").read_bytes()
    assert main(["run", cfg]) == 0
    assert (tmp_path / "pat.csv").read_bytes() == first


def test_unknown_experiment_is_a_config_error(tmp_path, capsys):
    cfg = _write(tmp_path / "bad.json", {"experiment": "nope"})
    assert main(["run", cfg]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config"


def test_missing_config_file_is_a_config_error(tmp_path, capsys):
    assert main(["run", str(tmp_path / "absent.json")]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "config"


def test_runtime_failure_exits_one(tmp_path, capsys):
    cfg = _write(tmp_path / "cfg.json", {
        "experiment": "decode-only",
        "params": {"code": "no-such-code", "grid": [0.97]},
        "output": str(tmp_path / "out.csv"),
    })
    assert main(["run", cfg]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "run"


def test_verify_fast_suite_passes(capsys):
    assert main(["verify", "--suite", "fast"]) == 0
    out = capsys.readouterr().out
    assert "criteria passed" in out
    assert "FAIL" not in out
