"""
Rolling historical-simulation VaR.
"""

from typing import Iterable, Optional

import numpy as np
import pandas as pd

from src.risk.quantiles import QUANTILE_METHOD, empirical_quantile


def hist_var(returns: Iterable[float], window: int, alpha: float) -> Optional[float]:
    """
    Empirical alpha-quantile of the last ``window`` observed returns.

    Missing returns are skipped. Returns None with fewer than ``window``
    observations.
    """
    values = np.asarray(list(returns) if not isinstance(returns, np.ndarray) else returns, dtype=float)
    values = values[~np.isnan(values)]
    if values.size < window:
        return None
    return empirical_quantile(values[-window:], alpha)


def rolling_hist_var(returns: pd.Series, window: int, alpha: float) -> pd.Series:
    """
    hist_var evaluated at every date of a date-ordered return series.

    The value at day t uses the last ``window`` observed returns up to and
    including t.
    """
    observed = returns.dropna()
    quantiles = observed.rolling(window, min_periods=window).quantile(alpha, interpolation=QUANTILE_METHOD)
    return quantiles.reindex(returns.index).ffill().where(returns.notna().cumsum() >= window)
