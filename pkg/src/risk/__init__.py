"""Risk model: quantile ensemble, calibration and shared quantile primitives."""

from src.risk.calibration import CalibrationState, apply_calibration, fit_calibration
from src.risk.ensemble import (
    LABEL_COLUMN,
    QuantileEnsemble,
    fit_ensemble,
    member_predictions,
    predict,
)
from src.risk.quantiles import empirical_quantile, pinball_loss

__all__ = [
    "CalibrationState",
    "apply_calibration",
    "fit_calibration",
    "LABEL_COLUMN",
    "QuantileEnsemble",
    "fit_ensemble",
    "member_predictions",
    "predict",
    "empirical_quantile",
    "pinball_loss",
]
