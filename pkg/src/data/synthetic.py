"""
Synthetic ETF panel generator.

Returns follow a GJR-GARCH(1,1) recursion with unit-variance Student-t
innovations, a common market factor, and a shared two-state volatility
regime. OHLC bars are built around the close path so that
high >= max(open, close) and low <= min(open, close) by construction.
"""

from typing import Optional

import numpy as np
import pandas as pd

from src.config import SyntheticConfig
from src.data.loader import align_to_calendar, recompute_returns
from src.exceptions import ConfigError
from src.models import PanelDataset
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _standard_t(rng: np.random.Generator, nu: float, size: tuple) -> np.ndarray:
    """Student-t draws rescaled to unit variance."""
    return rng.standard_t(nu, size=size) * np.sqrt((nu - 2.0) / nu)


def generate_synthetic_panel(
    n_symbols: int,
    n_days: int,
    seed: int,
    config: Optional[SyntheticConfig] = None,
) -> PanelDataset:
    """
    Generate a deterministic synthetic panel.

    Args:
        n_symbols: Number of symbols (>= 1)
        n_days: Number of trading days (>= 2)
        seed: Random seed; the same seed gives an identical panel
        config: Process parameters (defaults to SyntheticConfig())

    Returns:
        PanelDataset with VIX proxy and yield macro series
    """
    cfg = config or SyntheticConfig()
    if n_symbols < 1 or n_days < 2:
        raise ConfigError("generate_synthetic_panel needs n_symbols >= 1 and n_days >= 2")

    persistence = cfg.alpha_arch + cfg.gamma_lev / 2.0 + cfg.beta_garch
    if persistence >= 1.0:
        raise ConfigError(f"Synthetic GJR process is not stationary (persistence {persistence:.3f})")

    rng = np.random.default_rng(seed)
    symbols = [f"ETF{i + 1:02d}" for i in range(n_symbols)]
    dates = pd.bdate_range(start=cfg.start_date, periods=n_days, name="date")

    level = np.exp(cfg.vol_dispersion * rng.standard_normal(n_symbols))
    omega = cfg.omega * level**2
    variance = omega / (1.0 - persistence)

    common = _standard_t(rng, cfg.nu, (n_days,))
    idio = _standard_t(rng, cfg.nu, (n_days, n_symbols))
    w = cfg.common_factor_weight
    shocks = np.sqrt(w) * common[:, None] + np.sqrt(1.0 - w) * idio

    stressed = False
    regime = np.empty(n_days)
    switches = rng.random(n_days)
    returns = np.empty((n_days, n_symbols))
    sigma = np.empty((n_days, n_symbols))
    for t in range(n_days):
        if switches[t] < cfg.regime_switch_prob:
            stressed = not stressed
        regime[t] = cfg.regime_vol_scale if stressed else 1.0
        sigma[t] = np.sqrt(variance)
        eps = sigma[t] * shocks[t]
        returns[t] = np.maximum(regime[t] * eps, -0.5)
        variance = (
            omega
            + (cfg.alpha_arch + cfg.gamma_lev * (eps < 0)) * eps**2
            + cfg.beta_garch * variance
        )

    start_price = 50.0 + 25.0 * np.arange(n_symbols)
    closes = start_price * np.cumprod(1.0 + returns, axis=0)
    prev_close = np.vstack([start_price, closes[:-1]])
    day_sigma = sigma * regime[:, None]

    opens = prev_close * (1.0 + 0.2 * day_sigma * rng.standard_normal((n_days, n_symbols)))
    up = np.minimum(np.abs(rng.standard_normal((n_days, n_symbols))) * 0.5 * day_sigma, 0.5)
    down = np.minimum(np.abs(rng.standard_normal((n_days, n_symbols))) * 0.5 * day_sigma, 0.5)
    highs = np.maximum(opens, closes) * (1.0 + up)
    lows = np.minimum(opens, closes) * (1.0 - down)
    volumes = np.round(
        1e6 * level * np.exp(0.25 * rng.standard_normal((n_days, n_symbols)) + 0.5 * np.abs(shocks))
    )

    frame = pd.DataFrame(
        {
            "symbol": np.repeat(symbols, n_days),
            "date": np.tile(dates, n_symbols),
            "open": opens.T.ravel(),
            "high": highs.T.ravel(),
            "low": lows.T.ravel(),
            "close": closes.T.ravel(),
            "volume": volumes.T.ravel(),
            "return": np.nan,
        }
    )
    bars = align_to_calendar(frame, dates)
    bars["return"] = recompute_returns(bars)

    macro = _synthetic_macro(bars, dates, rng, cfg)
    logger.info(f"Generated synthetic panel: {n_symbols} symbols x {n_days} days (seed {seed})")
    return PanelDataset(bars=bars, macro=macro, dates=dates)


def _synthetic_macro(
    bars: pd.DataFrame,
    dates: pd.DatetimeIndex,
    rng: np.random.Generator,
    cfg: SyntheticConfig,
) -> pd.DataFrame:
    """VIX proxy from cross-sectional rolling vol; random-walk yield curve with gaps."""
    wide = bars.pivot(index="date", columns="symbol", values="return")
    rolling_vol = wide.rolling(20, min_periods=2).std().mean(axis=1)
    vix = 100.0 * np.sqrt(cfg.trading_days_per_year) * rolling_vol

    n_days = len(dates)
    short = np.maximum(1.5 + np.cumsum(rng.normal(0.0, 0.02, n_days)), 0.0)
    spread = 1.0 + np.cumsum(rng.normal(0.0, 0.015, n_days))
    gaps = rng.random(n_days) < cfg.macro_gap_rate

    macro = pd.DataFrame(
        {"vix": vix.reindex(dates).to_numpy(), "y3m": short, "y10y": short + spread},
        index=dates,
    )
    macro.loc[gaps, ["y3m", "y10y"]] = np.nan
    return macro
