"""
Backtest records.

Service-time quantities and evaluation-only quantities live in separate
sections so the no-look-ahead audit can compare service sections directly.
"""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd

from src.models.signals import QualityReport, SafeDecision, UncertaintyReport


@dataclass(frozen=True)
class EvaluationSection:
    """Known only after the fact; never read by service code paths."""

    realized_return: Optional[float] = None
    stress: bool = False


@dataclass(frozen=True)
class BacktestRecord:
    symbol: str
    date: pd.Timestamp
    refit: int
    scale_s: float
    member_preds: Tuple[float, ...]
    q_raw: float
    q_cal: float
    q_safe: float
    var_hist252: Optional[float]
    var_hist63: Optional[float]
    var_ewma: Optional[float]
    var_gjr: Optional[float]
    quality: QualityReport
    uncertainty: UncertaintyReport
    decision: SafeDecision
    fallback: bool = False
    evaluation: EvaluationSection = field(default_factory=EvaluationSection)

    def with_evaluation(self, **changes: Any) -> "BacktestRecord":
        return replace(self, evaluation=replace(self.evaluation, **changes))

    def service_row(self) -> Dict[str, Any]:
        """Flat view of everything the service knew at day t."""
        q, u, d = self.quality, self.uncertainty, self.decision
        return {
            "symbol": self.symbol,
            "date": self.date.strftime("%Y-%m-%d"),
            "refit": self.refit,
            "scale_s": self.scale_s,
            "q_raw": self.q_raw,
            "q_cal": self.q_cal,
            "q_safe": self.q_safe,
            "var_hist252": self.var_hist252,
            "var_hist63": self.var_hist63,
            "var_ewma": self.var_ewma,
            "var_gjr": self.var_gjr,
            "q_miss": q.q_miss,
            "q_ohlc": q.q_ohlc,
            "q_jump": q.q_jump,
            "q_vol": q.q_vol,
            "q_stale": q.q_stale,
            "Q": q.score_q,
            "quality_state": q.state.value,
            "u_model": u.u_model,
            "u_ood": u.u_ood,
            "u_drift": u.u_drift,
            "U": u.score_u,
            "uncertainty_state": u.state.value,
            "uncertainty_label": u.label.value,
            "A": d.adjustment_a,
            "R": d.ratio_r,
            "alert": d.alert.value,
            "anchor_missing": d.anchor_missing,
            "fallback": self.fallback,
        }

    def to_row(self) -> Dict[str, Any]:
        row = self.service_row()
        row["realized_return"] = self.evaluation.realized_return
        row["stress"] = self.evaluation.stress
        return row


def records_frame(records: List[BacktestRecord]) -> pd.DataFrame:
    """Records as one flat frame (CSV layout)."""
    return pd.DataFrame([r.to_row() for r in records])
