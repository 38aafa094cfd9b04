"""
Stress-regime labels from the VIX level.
"""

from typing import List, Sequence

import numpy as np
import pandas as pd

from src.models import BacktestRecord
from src.risk.quantiles import empirical_quantile
from src.utils.logger import get_logger

logger = get_logger(__name__)


def stress_threshold(prediction_dates: Sequence[pd.Timestamp], vix: pd.Series, quantile: float = 0.80):
    """Quantile of the pooled VIX over the distinct prediction dates; None if none is observed."""
    unique_dates = pd.DatetimeIndex(pd.unique(pd.DatetimeIndex(prediction_dates)))
    pooled = vix.reindex(unique_dates).dropna()
    if pooled.empty:
        return None
    return empirical_quantile(pooled.to_numpy(dtype=float), quantile)


def stress_mask(dates: Sequence[pd.Timestamp], vix: pd.Series, quantile: float = 0.80) -> np.ndarray:
    """
    True where the day's VIX is at or above the pooled quantile.

    Days with a missing VIX are non-stress.
    """
    dates = pd.DatetimeIndex(dates)
    threshold = stress_threshold(dates, vix, quantile)
    if threshold is None:
        logger.warning("VIX is missing on every prediction date; no stress days")
        return np.zeros(len(dates), dtype=bool)
    values = vix.reindex(dates).to_numpy(dtype=float)
    with np.errstate(invalid="ignore"):
        return np.where(np.isnan(values), False, values >= threshold)


def label_stress(records: List[BacktestRecord], vix: pd.Series, quantile: float = 0.80) -> List[BacktestRecord]:
    """Records with the evaluation stress flag set."""
    mask = stress_mask([r.date for r in records], vix, quantile)
    return [r.with_evaluation(stress=bool(flag)) for r, flag in zip(records, mask)]
