"""
Prediction-time features.

Every feature at day t uses only data dated t or earlier. Rows without
enough history carry missing values; the training window's medians fill
them at prediction time.
"""

from typing import Dict, Iterable, List, Mapping, Optional

import numpy as np
import pandas as pd

from src.config import FeatureConfig
from src.models import PanelDataset
from src.utils.logger import get_logger

logger = get_logger(__name__)

PARKINSON_FACTOR = 1.0 / (4.0 * np.log(2.0))
GARMAN_KLASS_COEF = 2.0 * np.log(2.0) - 1.0
ONEHOT_PREFIX = "sym_"
QUALITY_FEATURE = "score_q"


def ewma_volatility(returns: np.ndarray, ewma_lambda: float) -> np.ndarray:
    """
    RiskMetrics recursion v_t = lambda * v_{t-1} + (1 - lambda) * r_{t-1}^2, v seeded at 0.

    A missing r_{t-1} carries v forward. The volatility is missing until the
    first update.
    """
    out = np.full(len(returns), np.nan)
    variance = 0.0
    started = False
    for t in range(1, len(returns)):
        lagged = returns[t - 1]
        if not np.isnan(lagged):
            variance = ewma_lambda * variance + (1.0 - ewma_lambda) * lagged * lagged
            started = True
        if started:
            out[t] = np.sqrt(variance)
    return out


def _positive(*arrays: np.ndarray) -> np.ndarray:
    mask = np.ones(len(arrays[0]), dtype=bool)
    for a in arrays:
        mask &= ~np.isnan(a) & (a > 0)
    return mask


def parkinson_volatility(high: np.ndarray, low: np.ndarray) -> np.ndarray:
    """Daily Parkinson volatility sqrt(ln(H/L)^2 / (4 ln 2)); missing on non-positive prices."""
    out = np.full(len(high), np.nan)
    ok = _positive(high, low)
    out[ok] = np.sqrt(PARKINSON_FACTOR * np.log(high[ok] / low[ok]) ** 2)
    return out


def garman_klass_volatility(
    open_: np.ndarray, high: np.ndarray, low: np.ndarray, close: np.ndarray
) -> np.ndarray:
    """Daily Garman-Klass volatility; the variance is clipped at 0 before the square root."""
    out = np.full(len(high), np.nan)
    ok = _positive(open_, high, low, close)
    variance = (
        0.5 * np.log(high[ok] / low[ok]) ** 2
        - GARMAN_KLASS_COEF * np.log(close[ok] / open_[ok]) ** 2
    )
    out[ok] = np.sqrt(np.clip(variance, 0.0, None))
    return out


def rolling_zscore(values: pd.Series, window: int) -> pd.Series:
    """
    (x_t - mean) / sd over the trailing window including day t.

    Needs a full window of observations; a flat window (sd = 0) scores 0.
    """
    roll = values.rolling(window, min_periods=window)
    mean, sd = roll.mean(), roll.std()
    z = (values - mean) / sd
    z = z.where(sd != 0, 0.0)
    return z.where(mean.notna() & values.notna())


def _symbol_features(bars: pd.DataFrame, cfg: FeatureConfig) -> pd.DataFrame:
    ret = bars["return"]
    close = bars["close"]
    out = pd.DataFrame(index=bars.index)
    out["return_t"] = ret
    out["ewma_vol"] = ewma_volatility(ret.to_numpy(), cfg.ewma_lambda)
    out["parkinson_vol"] = parkinson_volatility(bars["high"].to_numpy(), bars["low"].to_numpy())
    out["garman_klass_vol"] = garman_klass_volatility(
        bars["open"].to_numpy(), bars["high"].to_numpy(), bars["low"].to_numpy(), close.to_numpy()
    )

    out["roll_vol_20"] = ret.rolling(cfg.roll_vol_window, min_periods=cfg.roll_vol_window).std()

    cum_peak = close.cummax().ffill()
    out["cum_peak"] = cum_peak
    out["drawdown"] = (close / cum_peak - 1.0).where(close > 0)

    out["z_return_60"] = rolling_zscore(ret, cfg.z_return_window)
    out["z_volume_20"] = rolling_zscore(bars["volume"], cfg.z_volume_window)

    short_sd = ret.rolling(cfg.roll_vol_window, min_periods=2).std()
    scale = out["roll_vol_20"].fillna(short_sd).fillna(cfg.scale_floor)
    out["scale_s"] = scale.clip(lower=cfg.scale_floor)
    return out


def compute_features(
    panel: PanelDataset,
    ewma_lambda: Optional[float] = None,
    config: Optional[FeatureConfig] = None,
) -> pd.DataFrame:
    """
    Compute the feature frame for every (symbol, date) of the panel.

    Args:
        panel: Ingested panel
        ewma_lambda: EWMA decay override (defaults to config.ewma_lambda)
        config: Feature settings

    Returns:
        Frame sorted by (symbol, date) with the raw bar echo, per-symbol
        features, symbol one-hots, cross-asset date aggregates, macro
        features and the local scale ``scale_s``
    """
    cfg = config or FeatureConfig()
    if ewma_lambda is not None:
        cfg = cfg.model_copy(update={"ewma_lambda": ewma_lambda})
    if not 0.0 < cfg.ewma_lambda < 1.0:
        raise ValueError("ewma_lambda must lie in (0, 1)")

    bars = panel.bars.sort_values(["symbol", "date"]).reset_index(drop=True)
    parts = [_symbol_features(group, cfg) for _, group in bars.groupby("symbol", sort=True)]
    frame = pd.concat([bars, pd.concat(parts).sort_index()], axis=1)

    for symbol in panel.symbols:
        frame[f"{ONEHOT_PREFIX}{symbol}"] = (frame["symbol"] == symbol).astype(float)

    by_date = frame.groupby("date")
    frame["xs_mean_return"] = by_date["return_t"].transform("mean")
    frame["xs_mean_vol"] = by_date["roll_vol_20"].transform("mean")

    macro = panel.macro.reindex(frame["date"])
    frame["vix"] = macro["vix"].to_numpy() if "vix" in macro else np.nan
    if {"y3m", "y10y"} <= set(macro.columns):
        frame["yield_slope"] = (macro["y10y"] - macro["y3m"]).to_numpy()
    else:
        frame["yield_slope"] = np.nan

    logger.debug(f"Computed features for {len(frame)} rows")
    return frame


def model_feature_columns(config: FeatureConfig, symbols: Iterable[str]) -> List[str]:
    """Ordered columns of X_t."""
    columns = list(config.model_features)
    if config.include_quality_feature:
        columns.append(QUALITY_FEATURE)
    if config.include_symbol_onehot:
        columns.extend(f"{ONEHOT_PREFIX}{s}" for s in sorted(symbols))
    return columns


def training_medians(rows: pd.DataFrame, columns: Iterable[str]) -> Dict[str, float]:
    """Per-feature medians of the training window; an all-missing column maps to 0."""
    medians: Dict[str, float] = {}
    for column in columns:
        value = rows[column].median(skipna=True)
        medians[column] = 0.0 if pd.isna(value) else float(value)
    return medians


def impute_with_medians(rows: pd.DataFrame, medians: Mapping[str, float]) -> pd.DataFrame:
    """Replace missing values of each median-mapped column by its training median."""
    columns = [c for c in medians if c in rows.columns]
    if not rows[columns].isna().any().any():
        return rows
    return rows.fillna({c: medians[c] for c in columns})
