"""
Per-row service outputs: quality, forecast, uncertainty and safe decision.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import pandas as pd


class _Ordered(str, Enum):
    """String enum whose declaration order is its severity order."""

    @property
    def rank(self) -> int:
        return list(type(self)).index(self)

    def __str__(self) -> str:
        return self.value


class QualityState(_Ordered):
    GREEN = "GREEN"
    YELLOW = "YELLOW"
    RED = "RED"


class UncertaintyState(_Ordered):
    LOW = "LOW"
    ELEVATED = "ELEVATED"


class UncertaintyLabel(_Ordered):
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


class AlertLevel(_Ordered):
    GREEN = "GREEN"
    ORANGE = "ORANGE"
    RED = "RED"


@dataclass(frozen=True)
class QualityComponents:
    q_miss: float
    q_ohlc: float
    q_jump: float
    q_vol: float
    q_stale: float


@dataclass(frozen=True)
class QualityReport:
    q_miss: float
    q_ohlc: float
    q_jump: float
    q_vol: float
    q_stale: float
    score_q: float
    state: QualityState


@dataclass(frozen=True)
class TailForecast:
    """
    Ensemble lower-tail forecast for r_{t+1}.

    Built in two stages: the ensemble fills member_preds and q_raw, and
    q_cal = q_raw + c_t is set once a calibration offset is known.
    """

    symbol: str
    date: pd.Timestamp
    member_preds: Tuple[float, ...]
    q_raw: float
    q_cal: Optional[float] = None


@dataclass(frozen=True)
class UncertaintyReport:
    u_model: float
    u_ood: float
    u_drift: float
    score_u: float
    state: UncertaintyState
    label: UncertaintyLabel


@dataclass(frozen=True)
class SafeDecision:
    q_hist63: Optional[float]
    adjustment_a: float
    q_safe: float
    ratio_r: float
    alert: AlertLevel
    anchor_missing: bool = False
