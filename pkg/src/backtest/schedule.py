"""
Walk-forward refit schedule.
"""

from dataclasses import dataclass
from typing import List, Tuple

import pandas as pd

from src.exceptions import ScheduleError


@dataclass(frozen=True)
class RefitWindow:
    """
    One refit point, as positions on the trading calendar.

    Training covers [train_start, pred_start), calibration is the last
    ``calib_len`` training days and predictions cover [pred_start, pred_end).
    """

    index: int
    train_start: int
    calib_start: int
    pred_start: int
    pred_end: int

    @property
    def n_prediction_days(self) -> int:
        return self.pred_end - self.pred_start


@dataclass(frozen=True)
class Schedule:
    dates: pd.DatetimeIndex
    refits: Tuple[RefitWindow, ...]

    def train_dates(self, refit: RefitWindow) -> pd.DatetimeIndex:
        return self.dates[refit.train_start:refit.pred_start]

    def calibration_dates(self, refit: RefitWindow) -> pd.DatetimeIndex:
        return self.dates[refit.calib_start:refit.pred_start]

    def prediction_dates(self, refit: RefitWindow) -> pd.DatetimeIndex:
        return self.dates[refit.pred_start:refit.pred_end]

    @property
    def evaluation_dates(self) -> pd.DatetimeIndex:
        if not self.refits:
            return self.dates[:0]
        return self.dates[self.refits[0].pred_start:self.refits[-1].pred_end]

    def refit_for(self, date: pd.Timestamp) -> RefitWindow:
        position = self.dates.get_loc(pd.Timestamp(date))
        for refit in self.refits:
            if refit.pred_start <= position < refit.pred_end:
                return refit
        raise KeyError(f"{date} is outside every prediction span")


def build_schedule(
    trading_dates: pd.DatetimeIndex, train_len: int = 756, step: int = 63, calib_len: int = 63
) -> Schedule:
    """
    Refit every ``step`` days on the most recent ``train_len`` days.

    The first prediction date is the first date with ``train_len`` prior
    dates; the final span may be shorter than ``step``.

    Raises:
        ScheduleError: If no date has a full training window behind it
    """
    dates = pd.DatetimeIndex(trading_dates)
    if calib_len > train_len:
        raise ScheduleError(f"Calibration window {calib_len} exceeds training window {train_len}")
    if len(dates) <= train_len:
        raise ScheduleError(
            f"{len(dates)} trading dates cannot support a {train_len}-day training window"
        )

    refits: List[RefitWindow] = []
    pred_start = train_len
    while pred_start < len(dates):
        pred_end = min(pred_start + step, len(dates))
        refits.append(
            RefitWindow(
                index=len(refits),
                train_start=pred_start - train_len,
                calib_start=pred_start - calib_len,
                pred_start=pred_start,
                pred_end=pred_end,
            )
        )
        pred_start = pred_end
    return Schedule(dates=dates, refits=tuple(refits))
