"""
Tests for the command-line entry point and its exit codes
"""

import json

import pytest

from main import EXIT_CONFIG, EXIT_OK, main

SPEC = {"n": 8, "m": 6, "kind": {"clique_sizes": {"support": [{"size": 3, "w": 1.0}]}}}


@pytest.fixture
def spec_file(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(SPEC), encoding="utf-8")
    return path


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({
        "spec": SPEC,
        "trials": 12,
        "master_seed": 3,
        "statistics": ["connected", "kconn(2)", "delta"],
        "sweep": {"parameter": "m", "values": [2, 8]},
    }), encoding="utf-8")
    return path


def test_sample_summary_and_dot(spec_file, capsys):
    assert main(["sample", "--spec", str(spec_file), "--seed", "4"]) == EXIT_OK
    summary = json.loads(capsys.readouterr().out)
    assert summary["n"] == 8
    assert summary["seed"] == 4

    assert main(["sample", "--spec", str(spec_file), "--seed", "4", "--dot"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("graph G {")


def test_moments(spec_file, capsys):
    assert main(["moments", "--spec", str(spec_file)]) == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["kappa"] == 3.0


def test_run_writes_outputs(config_file, tmp_path):
    out = tmp_path / "run"
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    assert (out / "aggregates.csv").exists()
    assert len((out / "trials.jsonl").read_text(encoding="utf-8").splitlines()) == 13


def test_sweep_writes_outputs(config_file, tmp_path):
    out = tmp_path / "sweep"
    assert main(["sweep", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
    lines = (out / "sweep.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0].startswith("# config_digest=")
    assert len(lines) == 4


def test_verify_prints_json_lines(capsys):
    assert main(["verify", "--suite", "inequality-exact", "--budget", "50"]) == EXIT_OK
    lines = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert lines[-1]["suite"] == "inequality-exact"
    assert lines[-1]["passed"] is True
    assert {line["name"] for line in lines[:-1]} == {"basic-bounds", "negative-correlation", "crossing-bounds", "multinomial"}


def test_configuration_errors_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_CONFIG

    broken = tmp_path / "broken.json"
    broken.write_text("{", encoding="utf-8")
    assert main(["moments", "--spec", str(broken)]) == EXIT_CONFIG

    bad_weights = tmp_path / "bad.json"
    bad_weights.write_text(json.dumps({**SPEC, "kind": {"clique_sizes": {"support": [{"size": 3, "w": 0.4}]}}}),
                           encoding="utf-8")
    assert main(["moments", "--spec", str(bad_weights)]) == EXIT_CONFIG

    no_sweep = tmp_path / "no_sweep.json"
    no_sweep.write_text(json.dumps({"spec": SPEC, "trials": 2}), encoding="utf-8")
    assert main(["sweep", "--config", str(no_sweep), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_unknown_suite_is_rejected_by_parser():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "--suite", "everything"])
    assert exc.value.code == 2
