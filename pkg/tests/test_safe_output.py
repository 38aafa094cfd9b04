"""Safe VaR, fallback ratio, alert escalation and policy variants."""

import numpy as np
import pytest

from src.backtest.ablations import FALLBACK_VARIANTS
from src.config import RunConfig
from src.models import AlertLevel, QualityState, UncertaintyLabel
from src.services.safe_output import SafeOutputPolicy, adjustment, alert_level, decide, fallback_ratio, safe_var


def test_adjustment_examples():
    assert adjustment(0.02, 0.0, 0.0) == 0.0
    assert adjustment(0.02, 0.4, 0.2) == pytest.approx(0.008)
    assert adjustment(0.02, 1.0, 1.0) == pytest.approx(1.25 * 0.02)
    with pytest.raises(ValueError):
        adjustment(0.0, 0.1, 0.1)


def test_safe_var_examples():
    assert safe_var(-0.02, -0.015, 0.0) == (-0.02, False)
    assert safe_var(-0.01, -0.03, 0.002) == (-0.03, False)
    q_safe, missing = safe_var(-0.02, -0.025, 0.008)
    assert q_safe == pytest.approx(-0.028)
    assert not missing


def test_safe_var_without_anchor():
    q_safe, missing = safe_var(-0.02, None, 0.008)
    assert q_safe == pytest.approx(-0.028)
    assert missing


def test_fallback_ratio_examples():
    assert fallback_ratio(-0.02, -0.02, 0.02) == 0.0
    assert fallback_ratio(-0.02, -0.028, 0.02) == pytest.approx(0.4)


@pytest.mark.parametrize(
    "quality, label, u_drift, ratio, expected",
    [
        (QualityState.RED, UncertaintyLabel.LOW, 0.0, 0.0, AlertLevel.RED),
        (QualityState.GREEN, UncertaintyLabel.LOW, 0.5, 0.0, AlertLevel.ORANGE),
        (QualityState.GREEN, UncertaintyLabel.LOW, 0.0, 0.0, AlertLevel.GREEN),
        (QualityState.GREEN, UncertaintyLabel.LOW, 0.0, 0.75, AlertLevel.RED),
        (QualityState.GREEN, UncertaintyLabel.LOW, 0.0, 0.35, AlertLevel.ORANGE),
        (QualityState.YELLOW, UncertaintyLabel.LOW, 0.0, 0.0, AlertLevel.ORANGE),
        (QualityState.GREEN, UncertaintyLabel.MEDIUM, 0.0, 0.0, AlertLevel.ORANGE),
        (QualityState.GREEN, UncertaintyLabel.HIGH, 0.0, 0.0, AlertLevel.RED),
        (QualityState.GREEN, UncertaintyLabel.LOW, 1.0, 0.0, AlertLevel.RED),
    ],
)
def test_alert_rules(quality, label, u_drift, ratio, expected):
    assert alert_level(quality, label, u_drift, ratio) is expected


def test_alert_without_quality_input():
    assert alert_level(None, UncertaintyLabel.LOW, 0.0, 0.0) is AlertLevel.GREEN
    assert alert_level(None, UncertaintyLabel.LOW, 0.0, 0.8) is AlertLevel.RED


def test_safe_output_is_monotone_in_scores():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        q_cal = float(rng.uniform(-0.05, 0.0))
        anchor = float(rng.uniform(-0.05, 0.0))
        s = float(rng.uniform(0.002, 0.04))
        u, q = float(rng.uniform()), float(rng.uniform())
        base = decide(q_cal, anchor, s, u, q, QualityState.GREEN, UncertaintyLabel.LOW, 0.0)
        higher_u = decide(q_cal, anchor, s, min(1.0, u + 0.1), q, QualityState.GREEN, UncertaintyLabel.LOW, 0.0)
        higher_q = decide(q_cal, anchor, s, u, min(1.0, q + 0.1), QualityState.GREEN, UncertaintyLabel.LOW, 0.0)
        assert base.q_safe <= q_cal
        assert base.q_safe <= anchor
        assert higher_u.q_safe <= base.q_safe
        assert higher_q.q_safe <= base.q_safe
        assert base.ratio_r >= 0.0
        assert base.adjustment_a >= 0.0
        assert higher_u.alert.rank >= base.alert.rank
        assert higher_q.alert.rank >= base.alert.rank


def _worsen(rng, quality, label, u_drift, ratio):
    """Move one alert input one step toward more severe."""
    which = rng.integers(4)
    if which == 0:
        quality = list(QualityState)[min(quality.rank + 1, 2)]
    elif which == 1:
        label = list(UncertaintyLabel)[min(label.rank + 1, 2)]
    elif which == 2:
        u_drift = u_drift + float(rng.uniform(0.0, 0.5))
    else:
        ratio = ratio + float(rng.uniform(0.0, 0.5))
    return quality, label, u_drift, ratio


def test_alert_level_never_drops_when_inputs_worsen():
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        inputs = (
            list(QualityState)[rng.integers(3)],
            list(UncertaintyLabel)[rng.integers(3)],
            float(rng.uniform(0.0, 1.2)),
            float(rng.uniform(0.0, 1.0)),
        )
        worse = _worsen(rng, *inputs)
        assert alert_level(*worse).rank >= alert_level(*inputs).rank


def test_variant_policies():
    config = RunConfig()
    policies = {name: build(config) for name, build in FALLBACK_VARIANTS.items()}
    args = (-0.02, -0.025, 0.02, 0.4, 0.2, QualityState.GREEN, UncertaintyLabel.MEDIUM, 0.0)

    raw = decide(*args, policies["raw"])
    assert raw.q_safe == -0.02
    assert raw.ratio_r == 0.0

    assert decide(*args, policies["simple"]).q_safe == pytest.approx(-0.025)
    assert decide(*args, policies["quality_only"]).q_safe == pytest.approx(-0.025)
    assert decide(*args, policies["uncertainty_only"]).q_safe == pytest.approx(-0.026)
    full = decide(*args, policies["full"])
    assert full.q_safe == pytest.approx(-0.028)
    assert full.alert is AlertLevel.ORANGE
    assert policies["full"] == SafeOutputPolicy()
