"""
Rolling residual-based calibration of the ensemble forecast.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src.risk.quantiles import empirical_quantile
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class CalibrationState:
    """Additive offset c_t fitted at a refit boundary."""

    c_t: float
    window: Optional[Tuple[str, str]]
    n_residuals: int


def fit_calibration(
    q_raw: np.ndarray,
    realized: np.ndarray,
    alpha: float,
    window: Optional[Tuple[str, str]] = None,
) -> CalibrationState:
    """
    c_t = alpha-quantile of pooled residuals r_{s+1} - q_raw_{s+1}.

    Pairs with a missing realized return are skipped. With no residuals the
    offset is 0.
    """
    q_raw = np.asarray(q_raw, dtype=float)
    realized = np.asarray(realized, dtype=float)
    residuals = realized - q_raw
    residuals = residuals[np.isfinite(residuals)]

    if residuals.size == 0:
        logger.warning(f"No calibration residuals in window {window}; using c_t = 0")
        return CalibrationState(c_t=0.0, window=window, n_residuals=0)

    return CalibrationState(
        c_t=empirical_quantile(residuals, alpha), window=window, n_residuals=int(residuals.size)
    )


def apply_calibration(q_raw: float, c_t: float) -> float:
    """q_cal = q_raw + c_t."""
    return q_raw + c_t
