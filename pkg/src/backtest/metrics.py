"""
Backtest evaluation: breach rates, Kupiec coverage test and pinball loss
over slices of the record frame.
"""

import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Mapping, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.special import erfc

from src.models import AlertLevel, QualityState, UncertaintyState
from src.risk.quantiles import pinball_loss

# Method name -> forecast column of the record frame
METHODS: Dict[str, str] = {
    "model": "q_cal",
    "safe": "q_safe",
    "hist252": "var_hist252",
    "ewma": "var_ewma",
    "gjr": "var_gjr",
}


def _xlogy_ratio(count: float, ratio: float) -> float:
    """count * ln(ratio) with 0 * ln(0) = 0."""
    if count == 0:
        return 0.0
    return count * math.log(ratio)


def kupiec_lr(n: int, x: int, p: float) -> Tuple[float, float]:
    """
    Kupiec unconditional-coverage likelihood ratio and its chi-square(1) p-value.

    Raises:
        ValueError: Unless 0 <= x <= n and n > 0
    """
    if n <= 0 or not 0 <= x <= n:
        raise ValueError(f"kupiec_lr needs n > 0 and 0 <= x <= n, got n={n}, x={x}")
    p_hat = x / n
    lr = 2.0 * (_xlogy_ratio(x, p_hat / p) + _xlogy_ratio(n - x, (1.0 - p_hat) / (1.0 - p)))
    lr = max(lr, 0.0)
    # chi-square(1) survival function
    return lr, float(erfc(math.sqrt(lr / 2.0)))


@dataclass(frozen=True)
class MethodMetrics:
    count: int
    breaches: int
    breach_rate: float
    kupiec_lr: float
    kupiec_p: float
    pinball: float

    def to_dict(self) -> Dict[str, Any]:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}


def method_metrics(realized: np.ndarray, forecast: np.ndarray, alpha: float) -> MethodMetrics:
    """Metrics over rows where both the outcome and the forecast exist."""
    realized = np.asarray(realized, dtype=float)
    forecast = np.asarray(forecast, dtype=float)
    ok = ~np.isnan(realized) & ~np.isnan(forecast)
    n = int(ok.sum())
    if n == 0:
        nan = float("nan")
        return MethodMetrics(count=0, breaches=0, breach_rate=nan, kupiec_lr=nan, kupiec_p=nan, pinball=nan)
    y, q = realized[ok], forecast[ok]
    x = int(np.sum(y < q))
    lr, p_value = kupiec_lr(n, x, alpha)
    return MethodMetrics(
        count=n,
        breaches=x,
        breach_rate=x / n,
        kupiec_lr=lr,
        kupiec_p=p_value,
        pinball=float(np.mean(pinball_loss(y, q, alpha))),
    )


def default_slices(frame: pd.DataFrame) -> Dict[str, pd.Series]:
    """Boolean masks for the standard breakdowns."""
    stress = frame["stress"].astype(bool)
    slices: Dict[str, pd.Series] = {
        "overall": pd.Series(True, index=frame.index),
        "stress": stress,
        "non_stress": ~stress,
    }
    for state in UncertaintyState:
        slices[f"uncertainty:{state.value}"] = frame["uncertainty_state"] == state.value
    for symbol in sorted(frame["symbol"].unique()):
        slices[f"symbol:{symbol}"] = frame["symbol"] == symbol
    for level in AlertLevel:
        slices[f"alert:{level.value}"] = frame["alert"] == level.value
    for state in QualityState:
        slices[f"quality:{state.value}"] = frame["quality_state"] == state.value
    return slices


class MetricsTable:
    """Metrics per (slice, method)."""

    def __init__(self, entries: Optional[Dict[str, Dict[str, MethodMetrics]]] = None):
        self.entries: Dict[str, Dict[str, MethodMetrics]] = entries or {}

    def get(self, slice_name: str, method: str) -> MethodMetrics:
        return self.entries[slice_name][method]

    @property
    def slices(self) -> List[str]:
        return list(self.entries)

    def to_dict(self) -> Dict[str, Dict[str, Dict[str, Any]]]:
        return {s: {m: v.to_dict() for m, v in methods.items()} for s, methods in self.entries.items()}

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"slice": s, "method": m, **asdict(v)}
            for s, methods in self.entries.items()
            for m, v in methods.items()
        ]
        return pd.DataFrame(rows)


def evaluate(
    frame: pd.DataFrame,
    alpha: float,
    slices: Optional[Mapping[str, pd.Series]] = None,
    methods: Optional[Mapping[str, str]] = None,
) -> MetricsTable:
    """
    Evaluate every method over every slice.

    Args:
        frame: Record frame (``records_frame`` layout)
        alpha: Target breach level
        slices: Named boolean masks (defaults to ``default_slices``)
        methods: Method name -> forecast column (defaults to METHODS)

    Returns:
        MetricsTable; an empty slice yields count 0 with undefined metrics
    """
    methods = methods or METHODS
    slices = slices if slices is not None else default_slices(frame)
    realized = frame["realized_return"].to_numpy(dtype=float)
    forecasts = {m: frame[col].to_numpy(dtype=float) for m, col in methods.items()}

    entries: Dict[str, Dict[str, MethodMetrics]] = {}
    for name, mask in slices.items():
        mask = np.asarray(mask, dtype=bool)
        entries[name] = {m: method_metrics(realized[mask], f[mask], alpha) for m, f in forecasts.items()}
    return MetricsTable(entries)


def rolling_breach_rates(
    frame: pd.DataFrame, window: int = 60, methods: Optional[Mapping[str, str]] = None
) -> pd.DataFrame:
    """
    Pooled breach rate over the trailing ``window`` prediction dates.

    Returns:
        Long frame with columns date, method, rate
    """
    methods = methods or METHODS
    parts = []
    for method, column in methods.items():
        ok = frame["realized_return"].notna() & frame[column].notna()
        daily = pd.DataFrame(
            {
                "date": frame["date"],
                "breach": (frame["realized_return"] < frame[column]) & ok,
                "count": ok,
            }
        ).groupby("date", sort=True)[["breach", "count"]].sum()
        rolled = daily.rolling(window, min_periods=window).sum()
        rate = (rolled["breach"] / rolled["count"].where(rolled["count"] > 0)).dropna()
        parts.append(pd.DataFrame({"date": rate.index, "method": method, "rate": rate.to_numpy()}))
    if not parts:
        return pd.DataFrame(columns=["date", "method", "rate"])
    return pd.concat(parts, ignore_index=True)


def alert_summary(
    frame: pd.DataFrame, expected_rows: int, macro_coverage: Optional[float] = None
) -> Dict[str, Any]:
    """Alert, quality and availability counts for one run."""
    alerts = {level.value: int((frame["alert"] == level.value).sum()) for level in AlertLevel}
    quality = {state.value: int((frame["quality_state"] == state.value).sum()) for state in QualityState}
    return {
        "records": int(len(frame)),
        "expected_records": int(expected_rows),
        "availability": (len(frame) / expected_rows) if expected_rows else None,
        "alerts": alerts,
        "quality_states": quality,
        "anchor_missing": int(frame["anchor_missing"].sum()),
        "fallback_records": int(frame["fallback"].sum()),
        "macro_coverage": macro_coverage,
    }
