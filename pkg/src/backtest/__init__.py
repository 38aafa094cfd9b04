"""Walk-forward backtest, evaluation and ablations."""

from src.backtest.ablations import FALLBACK_VARIANTS, AblationResult, apply_policy, run_ablations
from src.backtest.engine import BacktestResult, RefitDiagnostics, audit_causality, run_backtest
from src.backtest.metrics import (
    METHODS,
    MethodMetrics,
    MetricsTable,
    alert_summary,
    evaluate,
    kupiec_lr,
    rolling_breach_rates,
)
from src.backtest.schedule import RefitWindow, Schedule, build_schedule
from src.backtest.stress import label_stress, stress_mask

__all__ = [
    "FALLBACK_VARIANTS",
    "AblationResult",
    "apply_policy",
    "run_ablations",
    "BacktestResult",
    "RefitDiagnostics",
    "audit_causality",
    "run_backtest",
    "METHODS",
    "MethodMetrics",
    "MetricsTable",
    "alert_summary",
    "evaluate",
    "kupiec_lr",
    "rolling_breach_rates",
    "RefitWindow",
    "Schedule",
    "build_schedule",
    "label_stress",
    "stress_mask",
]
