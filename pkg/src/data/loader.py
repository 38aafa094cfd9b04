"""
CSV ingestion for the daily ETF panel and macro series.

Panel file header: symbol,date,open,high,low,close,volume[,return]
Macro file header: date,vix,y3m,y10y
Dates are YYYY-MM-DD; an empty or unparseable numeric cell is a missing value.
"""

from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd

from src.exceptions import IngestError
from src.models import BAR_COLUMNS, MACRO_COLUMNS, PRICE_FIELDS, PanelDataset
from src.utils.logger import get_logger

logger = get_logger(__name__)

DATE_FORMAT = "%Y-%m-%d"
PANEL_REQUIRED = ("symbol", "date", "open", "high", "low", "close", "volume")
NUMERIC_FIELDS = PRICE_FIELDS + ("volume", "return")


def _read_csv(path: str, what: str) -> pd.DataFrame:
    csv_path = Path(path)
    if not csv_path.is_file():
        raise IngestError(f"{what} file not found: {path}")
    try:
        return pd.read_csv(csv_path, dtype=str, keep_default_na=False)
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise IngestError(f"Cannot read {what} file {path}: {e}") from e


def _rename(frame: pd.DataFrame, schema: Optional[Dict[str, str]]) -> pd.DataFrame:
    if not schema:
        return frame
    return frame.rename(columns={source: canonical for canonical, source in schema.items()})


def _parse_dates(values: pd.Series, what: str) -> pd.Series:
    dates = pd.to_datetime(values.str.strip(), format=DATE_FORMAT, errors="coerce")
    bad = dates.isna()
    if bad.any():
        # header is line 1
        lines = (np.flatnonzero(bad.to_numpy()) + 2).tolist()
        raise IngestError(f"Unparseable dates in {what} file at lines {lines[:10]}")
    return dates


def _to_numeric(values: pd.Series) -> pd.Series:
    return pd.to_numeric(values.str.strip(), errors="coerce").astype(float)


def load_macro(path: Optional[str], calendar: pd.DatetimeIndex) -> pd.DataFrame:
    """
    Load the macro file aligned to the trading calendar.

    A missing path yields an all-missing frame: macro gaps never block output.
    """
    if path is None:
        return pd.DataFrame(np.nan, index=calendar, columns=list(MACRO_COLUMNS))

    raw = _read_csv(path, "macro")
    if "date" not in raw.columns:
        raise IngestError(f"Macro file {path} has no 'date' column")

    frame = pd.DataFrame({"date": _parse_dates(raw["date"], "macro")})
    for column in MACRO_COLUMNS:
        frame[column] = _to_numeric(raw[column]) if column in raw.columns else np.nan

    if frame["date"].duplicated().any():
        dupes = frame.loc[frame["date"].duplicated(keep=False), "date"]
        raise IngestError(f"Duplicate macro dates: {sorted(set(dupes.dt.strftime(DATE_FORMAT)))}")

    return frame.set_index("date").reindex(calendar)


def load_panel(
    path: str,
    schema: Optional[Dict[str, str]] = None,
    macro_path: Optional[str] = None,
) -> PanelDataset:
    """
    Ingest a panel CSV.

    Args:
        path: Panel CSV path
        schema: Optional map canonical column -> file column
        macro_path: Optional macro CSV path

    Returns:
        PanelDataset sorted by (symbol, date) on the union trading calendar

    Raises:
        IngestError: Unreadable file, missing columns, bad dates or duplicate rows
    """
    raw = _rename(_read_csv(path, "panel"), schema)

    missing_columns = [c for c in PANEL_REQUIRED if c not in raw.columns]
    if missing_columns:
        raise IngestError(f"Panel file {path} is missing columns {missing_columns}")

    frame = pd.DataFrame(
        {
            "symbol": raw["symbol"].str.strip(),
            "date": _parse_dates(raw["date"], "panel"),
        }
    )
    if (frame["symbol"] == "").any():
        lines = (np.flatnonzero((frame["symbol"] == "").to_numpy()) + 2).tolist()
        raise IngestError(f"Empty symbol at lines {lines[:10]}")

    duplicated = frame.duplicated(subset=["symbol", "date"], keep=False)
    if duplicated.any():
        dupes = frame[duplicated]
        details = [
            f"({sym}, {day:%Y-%m-%d}) at lines {(group.index + 2).tolist()}"
            for (sym, day), group in dupes.groupby(["symbol", "date"], sort=True)
        ]
        raise IngestError("Duplicate (symbol, date) rows: " + "; ".join(details))

    for column in NUMERIC_FIELDS:
        frame[column] = _to_numeric(raw[column]) if column in raw.columns else np.nan

    calendar = pd.DatetimeIndex(sorted(frame["date"].unique()), name="date")
    bars = align_to_calendar(frame, calendar)
    bars["return"] = recompute_returns(bars, delivered_return_frame=frame)

    logger.info(
        f"Loaded panel {path}: {bars['symbol'].nunique()} symbols, {len(calendar)} dates, "
        f"{int(bars['close'].isna().sum())} missing closes"
    )
    return PanelDataset(bars=bars, macro=load_macro(macro_path, calendar), dates=calendar)


def align_to_calendar(frame: pd.DataFrame, calendar: pd.DatetimeIndex) -> pd.DataFrame:
    """One row per (symbol, calendar date); absent dates become all-missing gap rows."""
    symbols = sorted(frame["symbol"].unique())
    full = pd.MultiIndex.from_product([symbols, calendar], names=["symbol", "date"])
    aligned = frame.set_index(["symbol", "date"]).reindex(full).reset_index()
    return aligned[list(BAR_COLUMNS)].sort_values(["symbol", "date"]).reset_index(drop=True)


def recompute_returns(bars: pd.DataFrame, delivered_return_frame: Optional[pd.DataFrame] = None) -> pd.Series:
    """
    Simple returns close_t / close_{t-1} - 1 per symbol.

    A delivered return overrides only where the recomputed one is unavailable
    because the close is missing.
    """
    closes = bars["close"]
    previous = bars.groupby("symbol", sort=False)["close"].shift(1)
    returns = closes / previous - 1.0

    if delivered_return_frame is not None:
        delivered = (
            delivered_return_frame.set_index(["symbol", "date"])["return"]
            .reindex(pd.MultiIndex.from_frame(bars[["symbol", "date"]]))
            .to_numpy()
        )
        use_delivered = closes.isna().to_numpy() & ~np.isnan(delivered)
        returns = returns.where(~use_delivered, delivered)
    return returns.astype(float)


def save_panel(panel: PanelDataset, path: str, macro_path: Optional[str] = None) -> None:
    """Write a panel (and optionally its macro series) in the ingest format."""
    out = panel.bars[list(BAR_COLUMNS)].copy()
    out["date"] = out["date"].dt.strftime(DATE_FORMAT)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    out.to_csv(path, index=False, na_rep="")

    if macro_path is not None:
        macro = panel.macro.reindex(columns=list(MACRO_COLUMNS)).copy()
        macro.index = macro.index.strftime(DATE_FORMAT)
        macro.index.name = "date"
        macro.to_csv(macro_path, na_rep="")
