"""Service-time fault injection."""

import numpy as np
import pandas as pd
import pytest

from src.config import FaultConfig
from src.data import compute_features, generate_synthetic_panel
from src.faults import FAULT_MODES, corrupt_panel
from src.quality import assess_frame


@pytest.fixture
def wide_panel():
    return generate_synthetic_panel(5, 901, seed=8)


def _key(frame: pd.DataFrame) -> pd.DataFrame:
    return frame.set_index(["symbol", "date"]).sort_index()


def test_zero_probability_is_a_no_op(small_panel):
    corrupted, log = corrupt_panel(small_panel, p=0.0)
    pd.testing.assert_frame_equal(corrupted.bars, small_panel.bars)
    assert len(log) == 0
    assert log.eligible_rows == len(small_panel.bars)


def test_same_seed_same_corruption(small_panel):
    a, log_a = corrupt_panel(small_panel, p=0.3, seed=2)
    b, log_b = corrupt_panel(small_panel, p=0.3, seed=2)
    pd.testing.assert_frame_equal(a.bars, b.bars)
    assert log_a.entries == log_b.entries
    _, log_c = corrupt_panel(small_panel, p=0.3, seed=3)
    assert log_a.entries != log_c.entries


def test_corrupted_fraction_is_near_p(wide_panel):
    _, log = corrupt_panel(wide_panel, config=FaultConfig())
    assert log.eligible_rows == 4505
    assert 0.135 <= len(log) / log.eligible_rows <= 0.165
    assert set(log.mode_counts()) == {"missing", "stale", "ohlc"}


def test_only_eligible_dates_are_touched(small_panel):
    eligible = small_panel.dates[300:]
    corrupted, log = corrupt_panel(small_panel, p=0.5, eligible_dates=eligible)
    assert all(e.date >= eligible[0] for e in log.entries)
    before = small_panel.bars[small_panel.bars["date"] < eligible[0]]
    after = corrupted.bars[corrupted.bars["date"] < eligible[0]]
    pd.testing.assert_frame_equal(before.reset_index(drop=True), after.reset_index(drop=True))


def test_untouched_rows_are_identical(small_panel):
    corrupted, log = corrupt_panel(small_panel, p=0.2)
    touched = {(e.symbol, e.date) for e in log.entries}
    clean, dirty = _key(small_panel.bars), _key(corrupted.bars)
    keep = [k for k in clean.index if k not in touched]
    pd.testing.assert_frame_equal(clean.loc[keep], dirty.loc[keep])


def test_each_mode_trips_its_quality_flag(wide_panel):
    corrupted, log = corrupt_panel(wide_panel, p=0.15, seed=4)
    frame = compute_features(corrupted)
    quality = pd.concat([frame[["symbol", "date"]], assess_frame(frame)], axis=1).set_index(["symbol", "date"])
    for entry in log.entries:
        row = quality.loc[(entry.symbol, entry.date)]
        if entry.mode == "missing":
            assert row["q_miss"] >= 2.0 / 6.0 - 1e-12
            assert 2 <= len(entry.fields) <= 4
        elif entry.mode == "stale":
            assert row["q_stale"] == 1.0
        else:
            assert row["q_ohlc"] == 1.0


def test_stale_needs_a_previous_close(small_panel):
    first_date = small_panel.dates[:1]
    _, log = corrupt_panel(small_panel, p=1.0, modes=["stale"], eligible_dates=first_date)
    assert len(log) == 0
    _, log = corrupt_panel(small_panel, p=1.0, modes=["stale", "missing"], eligible_dates=first_date)
    assert {e.mode for e in log.entries} == {"missing"}


def test_ohlc_injector_collapses_equal_range():
    row = {"open": 10.0, "high": 10.0, "low": 10.0, "close": 10.0}
    fields = FAULT_MODES["ohlc"](row, 10.0, np.random.default_rng(0), FaultConfig())
    assert fields == ("high",)
    assert row["high"] == pytest.approx(9.9)


def test_invalid_arguments(small_panel):
    with pytest.raises(ValueError):
        corrupt_panel(small_panel, p=1.5)
    with pytest.raises(ValueError):
        corrupt_panel(small_panel, modes=["flip"])


def test_log_frame_layout(small_panel):
    _, log = corrupt_panel(small_panel, p=0.2)
    frame = log.to_frame()
    assert list(frame.columns) == ["symbol", "date", "mode", "fields"]
    assert len(frame) == len(log)
