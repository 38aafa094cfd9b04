"""Run configuration loading and validation."""

from pathlib import Path

import pytest

from src.config import RunConfig
from src.exceptions import ConfigError

ROOT = Path(__file__).resolve().parent.parent


def test_defaults_are_the_documented_constants():
    config = RunConfig()
    assert config.alpha == 0.05
    assert config.windows.train_len == 756
    assert config.windows.step == 63
    assert config.calibration.window == 63
    assert config.model.n_members == 5
    assert config.quality.w_ohlc == 0.35
    assert config.uncertainty.w_model == 0.40
    assert config.safe_output.uncertainty_coef == 0.75
    assert config.faults.probability == 0.15


def test_example_file_matches_defaults():
    config = RunConfig.from_yaml(str(ROOT / "monitor.example.yaml"))
    assert config.model_dump(exclude={"run": {"threads"}}) == RunConfig().model_dump(exclude={"run": {"threads"}})


def test_weights_must_sum_to_one():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"quality": {"w_miss": 0.5}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"uncertainty": {"w_drift": 0.5}})


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"model": {"n_trees": 10}})
    with pytest.raises(ConfigError):
        RunConfig.from_dict(["not", "a", "mapping"])  # type: ignore[arg-type]


def test_missing_and_broken_yaml(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(str(tmp_path / "absent.yaml"))
    broken = tmp_path / "broken.yaml"
    broken.write_text("model: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(str(broken))


def test_with_overrides_ignores_none():
    config = RunConfig().with_overrides(run={"seed": 9, "threads": None}, data={"use_synthetic": True})
    assert config.run.seed == 9
    assert config.run.threads == RunConfig().run.threads
    assert config.data.use_synthetic
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(nonsense={"x": 1})


def test_echo_is_json_safe():
    echo = RunConfig().echo()
    assert echo["model"]["alpha"] == 0.05
    assert echo["faults"]["modes"] == ["missing", "stale", "ohlc"]
