"""
Market data domain types: bars, macro snapshots and the panel container.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

import numpy as np
import pandas as pd

CRITICAL_FIELDS = ("open", "high", "low", "close", "volume", "return")
PRICE_FIELDS = ("open", "high", "low", "close")
BAR_COLUMNS = ("symbol", "date") + CRITICAL_FIELDS
MACRO_COLUMNS = ("vix", "y3m", "y10y")


def _opt(value: object) -> Optional[float]:
    """NaN/None -> None, anything else -> float."""
    if value is None:
        return None
    value = float(value)  # type: ignore[arg-type]
    return None if np.isnan(value) else value


@dataclass(frozen=True)
class Bar:
    """One asset-day of raw OHLCV and return; absent fields are None."""

    symbol: str
    date: pd.Timestamp
    open: Optional[float]
    high: Optional[float]
    low: Optional[float]
    close: Optional[float]
    volume: Optional[float]
    ret: Optional[float]

    @classmethod
    def from_row(cls, row: Mapping[str, Any]) -> "Bar":
        return cls(
            symbol=str(row["symbol"]),
            date=pd.Timestamp(row["date"]),
            open=_opt(row["open"]),
            high=_opt(row["high"]),
            low=_opt(row["low"]),
            close=_opt(row["close"]),
            volume=_opt(row["volume"]),
            ret=_opt(row["return"]),
        )

    def field(self, name: str) -> Optional[float]:
        """Critical field by its panel column name."""
        return self.ret if name == "return" else getattr(self, name)


@dataclass(frozen=True)
class MacroSnapshot:
    """One day of auxiliary macro inputs."""

    date: pd.Timestamp
    vix: Optional[float]
    yields: Dict[str, Optional[float]] = field(default_factory=dict)

    @property
    def curve_available(self) -> bool:
        return all(v is not None for v in self.yields.values()) and bool(self.yields)


@dataclass(frozen=True)
class PanelDataset:
    """
    Daily ETF panel on a shared trading calendar.

    ``bars`` is a long frame with one row per (symbol, date) for every symbol
    and every calendar date; a date a symbol did not trade is an explicit gap
    row with all fields missing. ``macro`` is indexed by date.
    """

    bars: pd.DataFrame
    macro: pd.DataFrame
    dates: pd.DatetimeIndex

    @property
    def symbols(self) -> List[str]:
        return sorted(self.bars["symbol"].unique().tolist())

    def symbol_frame(self, symbol: str) -> pd.DataFrame:
        """Bars of one symbol in date order."""
        frame = self.bars[self.bars["symbol"] == symbol]
        return frame.sort_values("date").reset_index(drop=True)

    def bar(self, symbol: str, date: pd.Timestamp) -> Bar:
        mask = (self.bars["symbol"] == symbol) & (self.bars["date"] == pd.Timestamp(date))
        rows = self.bars[mask]
        if rows.empty:
            raise KeyError(f"No bar for {symbol} on {date}")
        return Bar.from_row(rows.iloc[0])

    def macro_snapshot(self, date: pd.Timestamp) -> MacroSnapshot:
        date = pd.Timestamp(date)
        if date not in self.macro.index:
            return MacroSnapshot(date=date, vix=None, yields={"y3m": None, "y10y": None})
        row = self.macro.loc[date]
        return MacroSnapshot(
            date=date,
            vix=_opt(row.get("vix")),
            yields={"y3m": _opt(row.get("y3m")), "y10y": _opt(row.get("y10y"))},
        )

    def truncate(self, end: pd.Timestamp) -> "PanelDataset":
        """Panel restricted to dates <= end."""
        end = pd.Timestamp(end)
        bars = self.bars[self.bars["date"] <= end].reset_index(drop=True)
        macro = self.macro[self.macro.index <= end]
        return PanelDataset(bars=bars, macro=macro, dates=self.dates[self.dates <= end])

    def select_symbols(self, symbols: List[str]) -> "PanelDataset":
        missing = sorted(set(symbols) - set(self.symbols))
        if missing:
            raise KeyError(f"Unknown symbols: {missing}")
        bars = self.bars[self.bars["symbol"].isin(symbols)].reset_index(drop=True)
        return PanelDataset(bars=bars, macro=self.macro, dates=self.dates)

    def with_bars(self, bars: pd.DataFrame) -> "PanelDataset":
        return PanelDataset(bars=bars, macro=self.macro, dates=self.dates)
