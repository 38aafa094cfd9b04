"""
Service-time input quality scoring.

The layer is the degradation detector, so nothing here raises on bad data:
missing or inconsistent inputs only raise the score.
"""

import math
from typing import Mapping, Optional

import numpy as np
import pandas as pd
from scipy.special import expit

from src.config import QualityConfig
from src.models import (
    CRITICAL_FIELDS,
    PRICE_FIELDS,
    Bar,
    QualityComponents,
    QualityReport,
    QualityState,
)

DEFAULT_QUALITY = QualityConfig()

QUALITY_COLUMNS = ["q_miss", "q_ohlc", "q_jump", "q_vol", "q_stale", "score_q", "quality_state"]


def logistic(x: float, c: float, s: float) -> float:
    """sigma(x; c, s) = 1 / (1 + exp(-(x - c) / s)), s > 0."""
    if s <= 0:
        raise ValueError("logistic slope must be positive")
    return float(expit((x - c) / s))


def _missing(value: Optional[float]) -> bool:
    return value is None or (isinstance(value, float) and math.isnan(value))


def ohlc_inconsistent(bar: Bar) -> bool:
    """True if any price relation among the present fields is violated."""
    present = {name: getattr(bar, name) for name in PRICE_FIELDS if not _missing(getattr(bar, name))}
    if any(price <= 0 for price in present.values()):
        return True

    high, low = present.get("high"), present.get("low")
    if high is not None:
        if low is not None and high < low:
            return True
        if any(present.get(k) is not None and high < present[k] for k in ("open", "close")):
            return True
    if low is not None:
        if any(present.get(k) is not None and low > present[k] for k in ("open", "close")):
            return True
    return False


def is_stale(close: Optional[float], prev_close: Optional[float], rel_tol: float) -> bool:
    """close_t repeats close_{t-1} within a relative tolerance."""
    if _missing(close) or _missing(prev_close):
        return False
    return abs(close - prev_close) <= rel_tol * abs(prev_close)  # type: ignore[operator]


def _anomaly(z: Optional[float], cfg: QualityConfig) -> float:
    if _missing(z):
        return 0.0
    return logistic(abs(z), cfg.logistic_center, cfg.logistic_slope)  # type: ignore[arg-type]


def quality_components(
    bar: Bar,
    features: Mapping[str, Optional[float]],
    prev_close: Optional[float],
    config: QualityConfig = DEFAULT_QUALITY,
) -> QualityComponents:
    """
    The five quality components of one asset-day.

    Args:
        bar: Raw service-time bar
        features: Feature row of the same day (z-scores may be missing)
        prev_close: Stored close of the previous trading day
        config: Weights and thresholds

    Returns:
        QualityComponents with q_miss, q_ohlc, q_jump, q_vol, q_stale
    """
    n_missing = sum(_missing(bar.field(name)) for name in CRITICAL_FIELDS)
    q_miss = n_missing / len(CRITICAL_FIELDS)

    q_ohlc = 1.0 if ohlc_inconsistent(bar) else 0.0

    ret = bar.ret
    if _missing(ret) and not _missing(bar.close) and not _missing(prev_close) and prev_close > 0:  # type: ignore[operator]
        ret = bar.close / prev_close - 1.0  # type: ignore[operator]
    if not _missing(ret) and abs(ret) > config.jump_threshold:  # type: ignore[arg-type]
        q_jump = 1.0
    else:
        q_jump = _anomaly(features.get("z_return_60"), config)

    q_vol = _anomaly(features.get("z_volume_20"), config)
    q_stale = 1.0 if is_stale(bar.close, prev_close, config.stale_rel_tol) else 0.0

    return QualityComponents(q_miss=q_miss, q_ohlc=q_ohlc, q_jump=q_jump, q_vol=q_vol, q_stale=q_stale)


def quality_score(components: QualityComponents, config: QualityConfig = DEFAULT_QUALITY) -> float:
    """Fixed-weight aggregate Q_t."""
    return (
        config.w_miss * components.q_miss
        + config.w_ohlc * components.q_ohlc
        + config.w_jump * components.q_jump
        + config.w_vol * components.q_vol
        + config.w_stale * components.q_stale
    )


def quality_state(score_q: float, config: QualityConfig = DEFAULT_QUALITY) -> QualityState:
    """Traffic light with inclusive upper boundaries."""
    if score_q <= config.green_max:
        return QualityState.GREEN
    if score_q <= config.yellow_max:
        return QualityState.YELLOW
    return QualityState.RED


def assess_quality(
    bar: Bar,
    features: Mapping[str, Optional[float]],
    prev_close: Optional[float],
    config: QualityConfig = DEFAULT_QUALITY,
) -> QualityReport:
    components = quality_components(bar, features, prev_close, config)
    score = quality_score(components, config)
    return QualityReport(
        q_miss=components.q_miss,
        q_ohlc=components.q_ohlc,
        q_jump=components.q_jump,
        q_vol=components.q_vol,
        q_stale=components.q_stale,
        score_q=score,
        state=quality_state(score, config),
    )


def worst_quality_report() -> QualityReport:
    """Every component at its worst value; used when a row cannot be assessed."""
    return QualityReport(
        q_miss=1.0, q_ohlc=1.0, q_jump=1.0, q_vol=1.0, q_stale=1.0, score_q=1.0, state=QualityState.RED
    )


def assess_frame(features: pd.DataFrame, config: QualityConfig = DEFAULT_QUALITY) -> pd.DataFrame:
    """
    Quality report columns for every row of a feature frame.

    The frame must carry the raw bar echo (symbol, date, OHLCV, return) and be
    sorted by (symbol, date); the result is aligned to its index.
    """
    rows = []
    prev_symbol, prev_close = None, None
    for record in features.to_dict("records"):
        if record["symbol"] != prev_symbol:
            prev_symbol, prev_close = record["symbol"], None
        bar = Bar.from_row(record)
        report = assess_quality(bar, record, prev_close, config)
        rows.append(
            (report.q_miss, report.q_ohlc, report.q_jump, report.q_vol, report.q_stale,
             report.score_q, report.state.value)
        )
        prev_close = None if np.isnan(record["close"]) else record["close"]
    return pd.DataFrame(rows, index=features.index, columns=QUALITY_COLUMNS)
