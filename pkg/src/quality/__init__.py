"""Quality-control layer."""

from src.quality.scores import (
    QUALITY_COLUMNS,
    assess_frame,
    assess_quality,
    logistic,
    ohlc_inconsistent,
    quality_components,
    quality_score,
    quality_state,
    worst_quality_report,
)

__all__ = [
    "QUALITY_COLUMNS",
    "assess_frame",
    "assess_quality",
    "logistic",
    "ohlc_inconsistent",
    "quality_components",
    "quality_score",
    "quality_state",
    "worst_quality_report",
]
