"""External benchmark VaR models."""

from src.baselines.ewma import GAUSSIAN_5PCT, ewma_var
from src.baselines.garch import (
    GarchFit,
    GarchState,
    GjrGarchParams,
    fit_gjr_garch,
    garch_step,
    garch_var,
    roll_forward,
)
from src.baselines.historical import hist_var, rolling_hist_var

__all__ = [
    "GAUSSIAN_5PCT",
    "ewma_var",
    "GarchFit",
    "GarchState",
    "GjrGarchParams",
    "fit_gjr_garch",
    "garch_step",
    "garch_var",
    "roll_forward",
    "hist_var",
    "rolling_hist_var",
]
