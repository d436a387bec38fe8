"""Configuration, catalog, CLI behaviour and report persistence."""

import json

import numpy as np
import pytest

from typicality_lab import ConfigurationError
from typicality_lab.harness import (
    CATALOG_SCHEMA,
    EXPERIMENTS,
    build_config,
    catalog,
    validate_config_dict,
)
from typicality_lab.harness.cli import main
from typicality_lab.reporting import (
    DataTable,
    ExperimentReport,
    MetricResult,
    read_table_csv,
    write_table_csv,
)

EXPECTED_NAMES = {
    "maxwell-lln",
    "liouville-check",
    "coin-lln",
    "stone-robustness",
    "equivariance",
    "conditional-born",
    "effective-detect",
    "born-lln",
    "absolute-uncertainty",
}


def test_catalog_contains_exactly_the_known_experiments():
    assert set(EXPERIMENTS) == EXPECTED_NAMES
    cat = catalog()
    assert {e["name"] for e in cat["experiments"]} == EXPECTED_NAMES


def test_every_entry_names_at_least_one_claim_and_defaults():
    for entry in catalog()["experiments"]:
        assert len(entry["claims"]) >= 1
        assert isinstance(entry["defaults"], dict) and entry["defaults"]


def test_catalog_validates_against_schema():
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(catalog(), CATALOG_SCHEMA)


def test_unknown_top_level_key_rejected():
    with pytest.raises(ConfigurationError):
        validate_config_dict({"experiment": "coin-lln", "bogus": 1}, EXPERIMENTS)


def test_unknown_param_rejected():
    with pytest.raises(ConfigurationError):
        validate_config_dict(
            {"experiment": "coin-lln", "params": {"does_not_exist": 3}}, EXPERIMENTS
        )


def test_unknown_experiment_rejected():
    with pytest.raises(ConfigurationError):
        validate_config_dict({"experiment": "not-a-thing"}, EXPERIMENTS)


def test_param_type_coercion_and_errors():
    cfg = validate_config_dict(
        {"experiment": "coin-lln", "params": {"epsilon": 1, "ladder": [10, 20]}}, EXPERIMENTS
    )
    assert cfg.params.epsilon == 1.0
    assert cfg.params.ladder == [10, 20]
    with pytest.raises(ConfigurationError):
        validate_config_dict({"experiment": "coin-lln", "params": {"epsilon": "big"}}, EXPERIMENTS)
    with pytest.raises(ConfigurationError):
        validate_config_dict({"experiment": "coin-lln", "seed": -3}, EXPERIMENTS)
    with pytest.raises(ConfigurationError):
        validate_config_dict({"experiment": "coin-lln", "workers": 0}, EXPERIMENTS)


def test_config_file_merging(tmp_path):
    cfg_file = tmp_path / "run.yaml"
    cfg_file.write_text(
        "experiment: coin-lln\nseed: 5\nparams:\n  ladder: [100, 200]\n  n_seeds: 3\n"
    )
    cfg = build_config(EXPERIMENTS, config_path=cfg_file, workers=2)
    assert cfg.experiment == "coin-lln"
    assert cfg.seed == 5 and cfg.workers == 2
    assert cfg.params.ladder == [100, 200]
    with pytest.raises(ConfigurationError):
        build_config(EXPERIMENTS, experiment="maxwell-lln", config_path=cfg_file)


def test_cli_list_human_and_json(capsys):
    assert main(["list"]) == 0
    human = capsys.readouterr().out
    for name in EXPECTED_NAMES:
        assert name in human
    assert main(["list", "--json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert {e["name"] for e in data["experiments"]} == EXPECTED_NAMES


def test_cli_validate_echoes_resolved_defaults(tmp_path, capsys):
    cfg_file = tmp_path / "v.yaml"
    cfg_file.write_text("experiment: stone-robustness\n")
    assert main(["validate", "--config", str(cfg_file)]) == 0
    echo = json.loads(capsys.readouterr().out)
    assert echo["experiment"] == "stone-robustness"
    assert echo["params"]["n_perturbations"] == 1024  # defaults materialized


def test_cli_exit_codes(tmp_path, capsys):
    # 2: configuration error
    assert main(["run", "not-an-experiment", "--out", str(tmp_path / "a")]) == 2
    # 0: passing run
    cfg = tmp_path / "ok.yaml"
    cfg.write_text(
        "experiment: stone-robustness\nparams:\n  n_perturbations: 1024\n  dt: 0.01\n"
    )
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 0
    # 1: metric failure through an unreachable tolerance override
    cfg_fail = tmp_path / "fail.yaml"
    cfg_fail.write_text(
        "experiment: stone-robustness\n"
        "tolerances:\n  analytic_jitter_deviation: 1.0e-30\n"
        "params:\n  n_perturbations: 64\n  dt: 0.01\n"
    )
    assert main(["run", "--config", str(cfg_fail), "--out", str(tmp_path / "c")]) == 1
    # 3: numerical error (a state the grid cannot resolve)
    cfg_num = tmp_path / "num.yaml"
    cfg_num.write_text(
        "experiment: equivariance\n"
        "params:\n  grid_points: 16\n  grid_length: 200.0\n  n_samples: 10\n"
        "  steps_per_beat: 128\n  n_checkpoints: 2\n  bins_per_cell: 2\n"
    )
    assert main(["run", "--config", str(cfg_num), "--out", str(tmp_path / "d")]) == 3
    capsys.readouterr()


def test_cli_run_writes_artifacts(tmp_path):
    out = tmp_path / "artifacts"
    assert main(["run", "stone-robustness", "--seed", "2", "--out", str(out)]) == 0
    report = ExperimentReport.from_json((out / "report.json").read_text())
    assert report.experiment == "stone-robustness"
    assert report.config["seed"] == 2
    assert (out / "tables" / "deviations.csv").exists()
    assert (out / "plots" / "deviations.svg").exists()


def test_default_out_dir_uses_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("TYPICALITY_LAB_OUT", str(tmp_path / "envroot"))
    assert main(["run", "stone-robustness", "--seed", "1"]) == 0
    assert (tmp_path / "envroot" / "stone-robustness" / "seed1" / "report.json").exists()


def test_report_json_round_trip_lossless():
    report = ExperimentReport(
        experiment="demo",
        config={"alpha": 0.1 + 0.2, "n": 3},
        metrics=[
            MetricResult(name="m", value=1 / 3, target=0.0, tolerance=1e-9, passed=False),
            MetricResult(name="info", value=float(np.pi)),
        ],
        flags={"notes": ["a", "b"], "rate": 1e-17},
        tables=[DataTable(name="t", columns=["x", "ok"], rows=[[0.1, True], [2.0, False]])],
        wall_time=1.25,
    )
    back = ExperimentReport.from_json(report.to_json())
    assert back == report
    # pass/fail is recomputable from stored values
    m = back.metric("m")
    assert (abs(m.value - m.target) < m.tolerance) == m.passed


def test_csv_round_trip(tmp_path):
    table = DataTable(
        name="vals",
        columns=["a", "b", "label"],
        rows=[[0.1 + 0.2, 7, "x"], [1e-300, -3, "y"]],
        note="claim: numbers survive the trip",
    )
    path = tmp_path / "vals.csv"
    write_table_csv(table, path)
    back = read_table_csv(path)
    assert back.columns == table.columns
    assert back.rows == table.rows
    assert back.note == table.note
