"""Shared fixtures: tiny synthetic panels and a fast run configuration."""

import os

# Must be set before src.config builds its settings instance
os.environ.setdefault("DATABASE_URL", "sqlite://")
os.environ.setdefault("LOG_TO_FILE", "false")
os.environ.setdefault("LOG_TO_CONSOLE", "false")

import numpy as np
import pandas as pd
import pytest

from src.config import RunConfig
from src.data import generate_synthetic_panel
from src.models import PanelDataset

FAST_CONFIG = {
    "data": {"use_synthetic": True},
    "synthetic": {"n_symbols": 3, "n_days": 420, "seed": 5},
    "model": {
        "n_members": 3,
        "n_estimators": 15,
        "max_depth": 2,
        "min_samples_leaf": 10,
        "min_train_rows": 100,
    },
    "calibration": {"window": 40},
    "uncertainty": {"drift_min_obs": 10, "state_min_history": 5},
    "safe_output": {"anchor_window": 40},
    "baselines": {"hist_window": 100, "garch_min_obs": 150},
    "windows": {"train_len": 220, "step": 50},
    "run": {"seed": 3, "threads": 1, "rolling_window": 20},
}


@pytest.fixture
def fast_config() -> RunConfig:
    return RunConfig.from_dict(FAST_CONFIG)


@pytest.fixture
def small_panel(fast_config: RunConfig) -> PanelDataset:
    syn = fast_config.synthetic
    return generate_synthetic_panel(syn.n_symbols, syn.n_days, syn.seed, config=syn)


@pytest.fixture
def two_day_csv(tmp_path):
    path = tmp_path / "panel.csv"
    path.write_text(
        "symbol,date,open,high,low,close,volume\n"
        "SPY,2023-01-03,99,102,98,100,1000\n"
        "SPY,2023-01-04,100,103,99,101,NaN\n",
        encoding="utf-8",
    )
    return path


def make_training_rows(
    n_dates: int, per_date: int, seed: int = 0, base: float = 0.005, slope: float = 0.02
) -> pd.DataFrame:
    """Rows with two features, a constant column and a heteroskedastic label."""
    rng = np.random.default_rng(seed)
    dates = np.repeat(pd.bdate_range("2020-01-01", periods=n_dates).to_numpy(), per_date)
    n = len(dates)
    x1 = rng.uniform(0.0, 1.0, n)
    return pd.DataFrame(
        {
            "date": dates,
            "x1": x1,
            "x2": rng.standard_normal(n),
            "flat": np.ones(n),
            "label": rng.standard_normal(n) * (base + slope * x1),
        }
    )
