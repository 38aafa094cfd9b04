"""
Service-time fault injection.

Each eligible row draws from its own random stream keyed by
(seed, symbol, date position), so the outcome for a row does not depend on
which other rows exist. Corrupted values are written into the stored panel
and later features see them too.
"""

import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.config import FaultConfig
from src.models import CRITICAL_FIELDS, PanelDataset
from src.utils.logger import get_logger

logger = get_logger(__name__)

Row = Dict[str, object]
Injector = Callable[[Row, Optional[float], np.random.Generator, FaultConfig], Optional[Tuple[str, ...]]]


@dataclass(frozen=True)
class FaultEntry:
    symbol: str
    date: pd.Timestamp
    mode: str
    fields: Tuple[str, ...]


@dataclass
class FaultLog:
    probability: float
    seed: int
    eligible_rows: int = 0
    entries: List[FaultEntry] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.entries)

    def mode_counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for entry in self.entries:
            counts[entry.mode] = counts.get(entry.mode, 0) + 1
        return counts

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    "symbol": e.symbol,
                    "date": e.date.strftime("%Y-%m-%d"),
                    "mode": e.mode,
                    "fields": ";".join(e.fields),
                }
                for e in self.entries
            ],
            columns=["symbol", "date", "mode", "fields"],
        )


def _present(value: object) -> bool:
    return value is not None and not pd.isna(value)


def inject_missing(row: Row, prev_close: Optional[float], rng: np.random.Generator, config: FaultConfig):
    """Blank a uniform 2-4 of the critical fields."""
    k = int(rng.integers(config.min_missing_fields, config.max_missing_fields + 1))
    chosen = set(rng.choice(len(CRITICAL_FIELDS), size=k, replace=False).tolist())
    fields = tuple(name for i, name in enumerate(CRITICAL_FIELDS) if i in chosen)
    for name in fields:
        row[name] = np.nan
    return fields


def inject_stale(row: Row, prev_close: Optional[float], rng: np.random.Generator, config: FaultConfig):
    """Flatten the day's prices to the previous close; needs a stored previous close."""
    if not _present(prev_close):
        return None
    for name in ("open", "high", "low", "close"):
        row[name] = prev_close
    row["return"] = 0.0
    return ("open", "high", "low", "close", "return")


def inject_ohlc(row: Row, prev_close: Optional[float], rng: np.random.Generator, config: FaultConfig):
    """Invert the high/low relation; needs both present."""
    high, low = row.get("high"), row.get("low")
    if not (_present(high) and _present(low)):
        return None
    if high > low:  # type: ignore[operator]
        row["high"], row["low"] = low, high
        return ("high", "low")
    row["high"] = config.ohlc_collapse_factor * low  # type: ignore[operator]
    return ("high",)


# Fault mode registry
FAULT_MODES: Dict[str, Injector] = {
    "missing": inject_missing,
    "stale": inject_stale,
    "ohlc": inject_ohlc,
}


def row_stream(seed: int, symbol: str, date_position: int) -> np.random.Generator:
    """Counter-based random stream for one (symbol, date)."""
    return np.random.default_rng([seed, zlib.crc32(symbol.encode("utf-8")), date_position])


def corrupt_panel(
    panel: PanelDataset,
    p: Optional[float] = None,
    modes: Optional[Sequence[str]] = None,
    seed: Optional[int] = None,
    eligible_dates: Optional[Iterable[pd.Timestamp]] = None,
    config: Optional[FaultConfig] = None,
) -> Tuple[PanelDataset, FaultLog]:
    """
    Corrupt eligible rows independently with probability p.

    A row's mode is drawn uniformly from the enabled modes; a mode that
    cannot apply to the row (stale without a previous close, ohlc without
    high and low) is dropped and the draw repeated among the rest.

    Args:
        panel: Clean panel
        p: Row-wise corruption probability (defaults to config.probability)
        modes: Enabled modes (defaults to config.modes)
        seed: Seed (defaults to config.seed)
        eligible_dates: Service-time dates; all dates when omitted
        config: Fault settings

    Returns:
        (corrupted panel, fault log)
    """
    config = config or FaultConfig()
    p = config.probability if p is None else p
    modes = list(config.modes if modes is None else modes)
    seed = config.seed if seed is None else seed
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"corruption probability must lie in [0, 1], got {p}")
    unknown = [m for m in modes if m not in FAULT_MODES]
    if unknown:
        raise ValueError(f"Unknown fault modes: {unknown}")

    eligible = set(pd.DatetimeIndex(eligible_dates)) if eligible_dates is not None else set(panel.dates)
    position = {d: i for i, d in enumerate(panel.dates)}
    log = FaultLog(probability=p, seed=seed)

    bars = panel.bars.sort_values(["symbol", "date"]).reset_index(drop=True)
    if p == 0.0 or not modes:
        log.eligible_rows = int(bars["date"].isin(eligible).sum())
        return panel.with_bars(bars), log

    rows = bars.to_dict("records")
    prev_symbol, prev_close = None, None
    for row in rows:
        symbol = str(row["symbol"])
        if symbol != prev_symbol:
            prev_symbol, prev_close = symbol, None
        date = pd.Timestamp(row["date"])

        if date in eligible:
            log.eligible_rows += 1
            rng = row_stream(seed, symbol, position[date])
            if rng.random() < p:
                candidates = list(modes)
                while candidates:
                    mode = candidates[int(rng.integers(len(candidates)))]
                    fields = FAULT_MODES[mode](row, prev_close, rng, config)
                    if fields is not None:
                        log.entries.append(FaultEntry(symbol=symbol, date=date, mode=mode, fields=fields))
                        break
                    candidates.remove(mode)

        close = row.get("close")
        prev_close = float(close) if _present(close) else None  # type: ignore[arg-type]

    corrupted = pd.DataFrame(rows, columns=bars.columns)
    logger.info(
        f"Corrupted {len(log)} of {log.eligible_rows} eligible rows ({log.mode_counts()})",
        extra={"mode": ",".join(modes)},
    )
    return panel.with_bars(corrupted), log
