"""Walk-forward schedule, evaluation metrics, stress labels and end-to-end runs."""

import math

import numpy as np
import pandas as pd
import pytest

from src.backtest import (
    FALLBACK_VARIANTS,
    alert_summary,
    apply_policy,
    audit_causality,
    build_schedule,
    evaluate,
    kupiec_lr,
    rolling_breach_rates,
    run_ablations,
    run_backtest,
    stress_mask,
)
from src.backtest.metrics import method_metrics
from src.config import RunConfig
from src.data import generate_synthetic_panel
from src.exceptions import ScheduleError
from src.faults import corrupt_panel
from src.models import records_frame
from src.risk import pinball_loss


def _dates(n: int) -> pd.DatetimeIndex:
    return pd.bdate_range("2015-01-02", periods=n)


def test_minimal_schedule():
    schedule = build_schedule(_dates(756 + 63))
    assert len(schedule.refits) == 1
    assert schedule.refits[0].n_prediction_days == 63
    assert schedule.refits[0].train_start == 0
    assert len(schedule.train_dates(schedule.refits[0])) == 756
    assert len(schedule.calibration_dates(schedule.refits[0])) == 63


def test_spans_abut():
    schedule = build_schedule(_dates(756 + 126))
    first, second = schedule.refits
    assert first.pred_end == second.pred_start
    assert second.train_start == first.train_start + 63


def test_short_final_span():
    dates = _dates(900)
    schedule = build_schedule(dates)
    assert [r.n_prediction_days for r in schedule.refits] == [63, 63, 18]
    assert schedule.evaluation_dates.equals(dates[756:])
    assert schedule.refit_for(dates[-1]).index == 2
    with pytest.raises(KeyError):
        schedule.refit_for(dates[0])


def test_schedule_errors():
    with pytest.raises(ScheduleError):
        build_schedule(_dates(756))
    with pytest.raises(ScheduleError):
        build_schedule(_dates(100), train_len=50, calib_len=60)


def test_kupiec_null_value():
    lr, p_value = kupiec_lr(100, 5, 0.05)
    assert lr == pytest.approx(0.0, abs=1e-12)
    assert p_value == pytest.approx(1.0)


@pytest.mark.parametrize("x, expected", [(196, 4.12), (261, 5.76), (239, 0.89)])
def test_kupiec_reference_values(x, expected):
    lr, p_value = kupiec_lr(4501, x, 0.05)
    assert lr == pytest.approx(expected, abs=0.01)
    assert 0.0 < p_value < 1.0


def test_kupiec_extremes_and_minimum():
    assert math.isfinite(kupiec_lr(50, 0, 0.05)[0])
    assert math.isfinite(kupiec_lr(50, 50, 0.05)[0])
    values = {x: kupiec_lr(1000, x, 0.05)[0] for x in range(30, 71)}
    assert min(values, key=values.get) == 50
    with pytest.raises(ValueError):
        kupiec_lr(0, 0, 0.05)
    with pytest.raises(ValueError):
        kupiec_lr(10, 11, 0.05)


def test_kupiec_p_value_is_chi_square():
    from scipy import stats

    lr, p_value = kupiec_lr(4501, 196, 0.05)
    assert p_value == pytest.approx(stats.chi2.sf(lr, 1), rel=1e-9)


def _record_frame(n: int, breaches: int) -> pd.DataFrame:
    realized = np.full(n, 0.01)
    realized[:breaches] = -0.05
    return pd.DataFrame(
        {
            "symbol": ["AAA", "BBB"] * (n // 2),
            "date": np.repeat(pd.bdate_range("2020-01-01", periods=n // 2).strftime("%Y-%m-%d"), 2),
            "realized_return": realized,
            "q_safe": np.full(n, -0.02),
            "stress": [i % 4 == 0 for i in range(n)],
            "uncertainty_state": ["LOW"] * n,
            "alert": ["GREEN"] * (n - 1) + ["RED"],
            "quality_state": ["GREEN"] * n,
            "anchor_missing": [False] * n,
            "fallback": [False] * n,
        }
    )


def test_evaluate_breach_rate():
    table = evaluate(_record_frame(20, 1), 0.05, methods={"safe": "q_safe"})
    overall = table.get("overall", "safe")
    assert overall.count == 20
    assert overall.breaches == 1
    assert overall.breach_rate == pytest.approx(0.05)


def test_slices_partition_counts():
    frame = _record_frame(40, 3)
    table = evaluate(frame, 0.05, methods={"safe": "q_safe"})
    overall = table.get("overall", "safe")
    stress, calm = table.get("stress", "safe"), table.get("non_stress", "safe")
    assert stress.count + calm.count == overall.count
    assert stress.breaches + calm.breaches == overall.breaches
    assert table.get("symbol:AAA", "safe").count + table.get("symbol:BBB", "safe").count == 40


def test_pinball_matches_loop():
    rng = np.random.default_rng(0)
    realized, forecast = rng.normal(0, 0.01, 300), rng.normal(-0.016, 0.003, 300)
    expected = sum(
        0.05 * (y - q) if y >= q else 0.95 * (q - y) for y, q in zip(realized, forecast)
    ) / 300
    assert method_metrics(realized, forecast, 0.05).pinball == pytest.approx(expected)
    assert pinball_loss(realized, forecast, 0.05).mean() == pytest.approx(expected)


def test_empty_slice_is_reported():
    table = evaluate(_record_frame(20, 1), 0.05, methods={"safe": "q_safe"})
    empty = table.get("uncertainty:ELEVATED", "safe")
    assert empty.count == 0
    assert empty.to_dict()["breach_rate"] is None


def test_rows_without_outcome_are_skipped():
    metrics = method_metrics(np.array([np.nan, -0.05, 0.01]), np.array([-0.02, np.nan, -0.02]), 0.05)
    assert metrics.count == 1
    assert metrics.breaches == 0


def test_stress_labels():
    dates = _dates(100)
    constant = pd.Series(20.0, index=dates)
    assert stress_mask(dates, constant).all()

    ladder = pd.Series(np.arange(1.0, 101.0), index=dates)
    mask = stress_mask(dates, ladder)
    assert mask.sum() == 20
    assert mask[-20:].all()

    assert not stress_mask(dates, pd.Series(np.nan, index=dates)).any()

    gappy = ladder.copy()
    gappy.iloc[-1] = np.nan
    assert not stress_mask(dates, gappy)[-1]


def test_rolling_breach_rates_and_alert_summary():
    frame = _record_frame(40, 4)
    rolled = rolling_breach_rates(frame, window=5, methods={"safe": "q_safe"})
    assert list(rolled.columns) == ["date", "method", "rate"]
    assert len(rolled) == 16
    assert rolled["rate"].iloc[0] == pytest.approx(0.4)

    summary = alert_summary(frame, expected_rows=40, macro_coverage=0.5)
    assert summary["availability"] == 1.0
    assert summary["alerts"] == {"GREEN": 39, "ORANGE": 0, "RED": 1}


@pytest.fixture
def clean_run(small_panel, fast_config):
    return run_backtest(small_panel, fast_config)


def test_backtest_covers_every_symbol_day(clean_run, fast_config):
    assert clean_run.expected_records == 3 * (fast_config.synthetic.n_days - fast_config.windows.train_len)
    assert len(clean_run.records) == clean_run.expected_records
    assert len(clean_run.refits) == 4
    keys = {(r.symbol, r.date) for r in clean_run.records}
    assert len(keys) == len(clean_run.records)


def test_backtest_records_are_well_formed(clean_run):
    frame = records_frame(clean_run.records)
    for column in ("q_raw", "q_cal", "q_safe", "U", "Q", "A", "R"):
        assert np.isfinite(frame[column].to_numpy(dtype=float)).all()
    assert frame["U"].between(0, 1).all()
    assert frame["Q"].between(0, 1).all()
    assert (frame["q_safe"] <= frame["q_cal"] + 1e-15).all()
    anchored = frame["var_hist63"].notna()
    assert (frame.loc[anchored, "q_safe"] <= frame.loc[anchored, "var_hist63"] + 1e-15).all()
    # the last day has no next-day return
    last = frame["date"] == frame["date"].max()
    assert frame.loc[last, "realized_return"].isna().all()
    assert frame.loc[~last, "realized_return"].notna().all()


def test_backtest_is_deterministic(small_panel, fast_config, clean_run):
    again = run_backtest(small_panel, fast_config)
    pd.testing.assert_frame_equal(records_frame(clean_run.records), records_frame(again.records))


def test_simple_variant_is_min_of_model_and_anchor(clean_run, fast_config):
    simple = apply_policy(clean_run.records, FALLBACK_VARIANTS["simple"](fast_config), fast_config)
    for base, variant in zip(clean_run.records, simple):
        expected = base.q_cal if base.var_hist63 is None else min(base.q_cal, base.var_hist63)
        assert variant.q_safe == pytest.approx(expected)
        assert base.q_safe <= variant.q_safe + 1e-15


def test_corrupted_run_keeps_full_availability(small_panel, fast_config, clean_run):
    corrupted, log = corrupt_panel(
        small_panel, p=0.3, eligible_dates=clean_run.schedule.evaluation_dates, config=fast_config.faults
    )
    result = run_backtest(corrupted, fast_config, eval_panel=small_panel)
    assert len(result.records) == result.expected_records
    frame = records_frame(result.records)
    clean = records_frame(clean_run.records)
    np.testing.assert_array_equal(frame["realized_return"].to_numpy(), clean["realized_return"].to_numpy())
    assert len(log) > 0
    assert (frame["quality_state"] != "GREEN").sum() > 0


def test_evaluation_over_a_run(clean_run, fast_config):
    table = evaluate(records_frame(clean_run.records), fast_config.alpha)
    overall = table.get("overall", "model")
    assert overall.count == clean_run.expected_records - 3
    assert 0.0 <= overall.breach_rate <= 0.3
    assert "symbol:ETF01" in table.slices


@pytest.mark.slow
def test_service_outputs_do_not_look_ahead(small_panel, fast_config, clean_run):
    assert audit_causality(small_panel, fast_config, clean_run.records, n=4, seed=1) == []


@pytest.mark.slow
def test_ablations(small_panel, fast_config):
    result = run_ablations(small_panel, fast_config)
    assert list(result.fallback_table["variant"]) == ["raw", "simple", "quality_only", "uncertainty_only", "full"]
    assert list(result.quality_table["experiment"]) == ["corrupt_full", "no_quality_feature", "no_quality_service"]
    assert len(result.no_quality_feature.feature_list) == len(result.corrupted.feature_list) - 1
    table = result.fallback_table.set_index("variant")
    assert table.loc["full", "clean_overall"] <= table.loc["raw", "clean_overall"]


@pytest.fixture(scope="module")
def desk_scale():
    """Default configuration on the full 6 x 2000 synthetic panel, clean and corrupted at p = 0.15."""
    config = RunConfig.from_dict({"data": {"use_synthetic": True}, "run": {"seed": 3}})
    syn = config.synthetic
    panel = generate_synthetic_panel(syn.n_symbols, syn.n_days, syn.seed, config=syn)
    clean = run_backtest(panel, config)
    corrupted_panel, log = corrupt_panel(
        panel, p=0.15, eligible_dates=clean.schedule.evaluation_dates, config=config.faults
    )
    corrupted = run_backtest(corrupted_panel, config, eval_panel=panel)
    return config, panel, clean, corrupted, log


@pytest.mark.slow
def test_desk_scale_clean_run(desk_scale):
    config, panel, clean, _, _ = desk_scale
    assert (config.synthetic.n_symbols, config.synthetic.n_days) == (6, 2000)
    assert len(clean.records) == clean.expected_records
    table = evaluate(records_frame(clean.records), config.alpha)
    safe = table.get("overall", "safe").breach_rate
    model = table.get("overall", "model").breach_rate
    assert safe <= model
    assert 0.02 <= safe <= 0.09
    assert 0.02 <= model <= 0.09

    again = run_backtest(panel, config)
    pd.testing.assert_frame_equal(records_frame(clean.records), records_frame(again.records))


@pytest.mark.slow
def test_desk_scale_corruption(desk_scale):
    _, _, clean, corrupted, log = desk_scale
    assert len(corrupted.records) == corrupted.expected_records

    frame = records_frame(corrupted.records).set_index(["symbol", "date"])
    faults = log.to_frame().set_index(["symbol", "date"])
    ohlc = faults.index[faults["mode"] == "ohlc"]
    missing = faults.index[faults["mode"] == "missing"]
    assert len(ohlc) > 0 and len(missing) > 0
    assert (frame.loc[ohlc, "q_ohlc"] == 1.0).all()
    assert (frame.loc[missing, "q_miss"] >= 2 / 6 - 1e-12).all()

    def escalated(records):
        counts = alert_summary(records_frame(records), len(records))["alerts"]
        return counts["ORANGE"] + counts["RED"]

    assert escalated(corrupted.records) > escalated(clean.records)


@pytest.mark.slow
def test_desk_scale_records_do_not_look_ahead(desk_scale):
    config, panel, clean, _, _ = desk_scale
    assert audit_causality(panel, config, clean.records, n=20, seed=2) == []
