"""
Models package.

Shared domain types passed between the service layers.
"""

from src.models.market import (
    BAR_COLUMNS,
    CRITICAL_FIELDS,
    MACRO_COLUMNS,
    PRICE_FIELDS,
    Bar,
    MacroSnapshot,
    PanelDataset,
)
from src.models.records import BacktestRecord, EvaluationSection, records_frame
from src.models.signals import (
    AlertLevel,
    QualityComponents,
    QualityReport,
    QualityState,
    SafeDecision,
    TailForecast,
    UncertaintyLabel,
    UncertaintyReport,
    UncertaintyState,
)

__all__ = [
    "BAR_COLUMNS",
    "CRITICAL_FIELDS",
    "MACRO_COLUMNS",
    "PRICE_FIELDS",
    "Bar",
    "MacroSnapshot",
    "PanelDataset",
    "BacktestRecord",
    "EvaluationSection",
    "records_frame",
    "AlertLevel",
    "QualityComponents",
    "QualityReport",
    "QualityState",
    "SafeDecision",
    "TailForecast",
    "UncertaintyLabel",
    "UncertaintyReport",
    "UncertaintyState",
]
