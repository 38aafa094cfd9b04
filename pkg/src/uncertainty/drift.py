"""
Per-symbol breach tracking for calibration drift and the U history.
"""

from collections import deque
from typing import Deque, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from src.config import UncertaintyConfig


class DriftTracker:
    """
    Rolling record of realized breaches and past U scores per symbol.

    A forecast issued on day t for day t+1 is held as pending and resolved
    when the next day's return is observed, so the buffer only ever holds
    outcomes known at the time of use. Single writer per symbol.
    """

    def __init__(self, window: int = 60, history: int = 252):
        self.window = window
        self.history = history
        self._breaches: Dict[str, Deque[bool]] = {}
        self._u_history: Dict[str, Deque[float]] = {}
        self._pending: Dict[str, Tuple[pd.Timestamp, float]] = {}

    @classmethod
    def from_config(cls, config: UncertaintyConfig) -> "DriftTracker":
        return cls(window=config.drift_window, history=config.state_history)

    def _buffer(self, symbol: str) -> Deque[bool]:
        if symbol not in self._breaches:
            self._breaches[symbol] = deque(maxlen=self.window)
        return self._breaches[symbol]

    def observe(self, symbol: str, q_cal: float, realized: Optional[float]) -> Optional[bool]:
        """Append one evaluated forecast; a missing outcome or forecast is skipped."""
        if realized is None or np.isnan(realized) or q_cal is None or np.isnan(q_cal):
            return None
        breach = bool(realized < q_cal)
        self._buffer(symbol).append(breach)
        return breach

    def record_forecast(self, symbol: str, date: pd.Timestamp, q_cal: float) -> None:
        """Hold day t's calibrated forecast until r_{t+1} is observed."""
        self._pending[symbol] = (pd.Timestamp(date), q_cal)

    def resolve(self, symbol: str, realized: Optional[float]) -> Optional[bool]:
        """Score the pending forecast against the newly observed return."""
        pending = self._pending.pop(symbol, None)
        if pending is None:
            return None
        return self.observe(symbol, pending[1], realized)

    def observations(self, symbol: str) -> int:
        return len(self._breaches.get(symbol, ()))

    def breach_rate(self, symbol: str) -> Optional[float]:
        buffer = self._breaches.get(symbol)
        if not buffer:
            return None
        return sum(buffer) / len(buffer)

    def push_score(self, symbol: str, score_u: float) -> None:
        if symbol not in self._u_history:
            self._u_history[symbol] = deque(maxlen=self.history)
        self._u_history[symbol].append(score_u)

    def u_history(self, symbol: str) -> Tuple[float, ...]:
        return tuple(self._u_history.get(symbol, ()))
