import json
from pathlib import Path

import pytest

from decarb_speed.cli import main
from decarb_speed.config import RunConfig, apply_overrides, load_settings
from decarb_speed.errors import ConfigError


def test_load_settings_defaults_without_file(tmp_path: Path, monkeypatch):
    monkeypatch.setattr("decarb_speed.config.DEFAULT_CONFIG_PATH", tmp_path / "absent.yaml")

    config = load_settings(env={})

    assert config == RunConfig()
    assert config.region == "World"
    assert config.start_year == 2010
    assert config.fit.time_unit_years == 5.0
    assert config.seed == 42
    assert config.bootstrap_samples == 5000
    assert config.formats == ("json", "csv")


def test_yaml_then_environment(config_file: Path):
    config = load_settings(config_file, env={"DECARB_SEED": "99", "DECARB_START_YEAR": "2020",
                                             "DECARB_U_MAX": "1.52", "LOG_LEVEL": "DEBUG"})

    assert config.seed == 99
    assert config.bootstrap_samples == 1000
    assert config.start_year == 2020
    assert config.fit.start_year == 2020
    assert config.u_max_override == 1.52
    assert config.log_level == "DEBUG"
    assert config.trajectory_scenarios == ("SSP1-19", "SSP3-Baseline")


def test_flags_win_over_environment(config_file: Path):
    config = load_settings(config_file, env={"DECARB_SEED": "99"})

    config = apply_overrides(config, {"seed": 5, "region": "R5.2ASIA", "time_unit_years": 10.0,
                                      "formats": ("json",), "output_dir": None})

    assert config.seed == 5
    assert config.region == "R5.2ASIA"
    assert config.fit.time_unit_years == 10.0
    assert config.formats == ("json",)
    assert config.output_dir == Path("output")


@pytest.mark.parametrize("overrides", [
    {"bootstrap_samples": 999},
    {"start_year": 2060},
    {"time_unit_years": 0.0},
    {"u_max_override": -1.0},
    {"formats": ("xml",)},
])
def test_invalid_overrides(overrides):
    with pytest.raises(ConfigError):
        apply_overrides(RunConfig(), overrides)


def test_explicit_config_path_must_exist(tmp_path: Path):
    with pytest.raises(ConfigError) as excinfo:
        load_settings(tmp_path / "typo.yaml", env={})

    assert excinfo.value.context == str(tmp_path / "typo.yaml")


def test_invalid_yaml(tmp_path: Path):
    path = tmp_path / "broken.yaml"
    path.write_text("fit: [unclosed\n")

    with pytest.raises(ConfigError):
        load_settings(path, env={})


def test_theta_bounds_must_be_ordered(tmp_path: Path):
    path = tmp_path / "bounds.yaml"
    path.write_text("fit:\n  theta_min: 1.0\n  theta_max: 0.5\n")

    with pytest.raises(ConfigError):
        load_settings(path, env={})


def test_unknown_statistic(tmp_path: Path):
    path = tmp_path / "stats.yaml"
    path.write_text("ensemble:\n  statistics: [mean, mode]\n")

    with pytest.raises(ConfigError):
        load_settings(path, env={})


def _run(*args: str) -> int:
    return main(list(args))


def test_report_command(config_file: Path, ensemble_csv: Path, tmp_path: Path, monkeypatch):
    monkeypatch.delenv("DECARB_SEED", raising=False)
    out = tmp_path / "out"

    code = _run("report", "--config", str(config_file), "--input", str(ensemble_csv),
                "--out", str(out), "--seed", "3", "--format", "json")

    assert code == 0
    assert not (out / "estimates.csv").exists()
    summary = json.loads((out / "summary.json").read_text())
    assert {ci["seed"] for ci in summary["bootstrap"]} == {3}


def test_fit_command_with_pinned_u_max(config_file: Path, ensemble_csv: Path, tmp_path: Path):
    out = tmp_path / "out"

    code = _run("fit", "--config", str(config_file), "--input", str(ensemble_csv),
                "--out", str(out), "--u-max", "1.52")

    assert code == 0
    estimates = json.loads((out / "estimates.json").read_text())["estimates"]
    assert all(row["converged"] for row in estimates)
    assert not (out / "summary.json").exists()


def test_missing_input_file_exit_code(config_file: Path, tmp_path: Path):
    code = _run("ingest", "--config", str(config_file), "--input", str(tmp_path / "nope.csv"),
                "--out", str(tmp_path / "out"))

    assert code == 3


def test_config_error_exit_code(config_file: Path, ensemble_csv: Path, tmp_path: Path):
    code = _run("stats", "--config", str(config_file), "--input", str(ensemble_csv),
                "--bootstrap-samples", "10", "--out", str(tmp_path / "out"))

    assert code == 2


def test_missing_config_file_exit_code(ensemble_csv: Path, tmp_path: Path):
    code = _run("fit", "--config", str(tmp_path / "typo.yaml"), "--input", str(ensemble_csv),
                "--out", str(tmp_path / "out"))

    assert code == 2
    assert not (tmp_path / "out" / "estimates.json").exists()


def test_u_max_that_never_halves_exit_code(config_file: Path, ensemble_csv: Path, tmp_path: Path):
    code = _run("fit", "--config", str(config_file), "--input", str(ensemble_csv),
                "--u-max", "0.45", "--out", str(tmp_path / "out"))

    assert code == 5


def test_bad_format_flag_is_a_usage_error(tmp_path: Path):
    with pytest.raises(SystemExit) as excinfo:
        _run("report", "--format", "xml", "--input", str(tmp_path / "x.csv"))

    assert excinfo.value.code == 2
