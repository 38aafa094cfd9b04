"""
Pooled bootstrap quantile gradient-boosting ensemble.

Each member is fitted on a date-level bootstrap of the training window: dates
are drawn with replacement and every symbol on a drawn date enters once per
draw. A draw enters the booster as per-row sample weights (the number of
times its date was drawn), so leaf-size limits count distinct observations.
Member b uses seed ^ b for both the bootstrap and the booster.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from sklearn.ensemble import GradientBoostingRegressor

from src.config import ModelConfig
from src.data.features import impute_with_medians, training_medians
from src.exceptions import EnsembleFitError, PredictionError
from src.models import TailForecast
from src.risk.calibration import CalibrationState, apply_calibration
from src.services.pool import WorkerPool
from src.utils.logger import get_logger

logger = get_logger(__name__)

LABEL_COLUMN = "label"


@dataclass(frozen=True)
class QuantileEnsemble:
    """Fitted members plus everything needed to reproduce a prediction."""

    members: Tuple[GradientBoostingRegressor, ...]
    feature_list: Tuple[str, ...]
    medians: Dict[str, float]
    alpha: float
    seed: int
    window: Tuple[str, str]
    n_rows: int
    member_seeds: Tuple[int, ...] = field(default=())

    @property
    def size(self) -> int:
        return len(self.members)


def bootstrap_positions(dates: np.ndarray, seed: int) -> np.ndarray:
    """Row positions of a date-level bootstrap draw."""
    unique_dates, inverse = np.unique(dates, return_inverse=True)
    rows_by_date: List[np.ndarray] = [np.flatnonzero(inverse == i) for i in range(len(unique_dates))]
    rng = np.random.default_rng(seed)
    drawn = rng.integers(0, len(unique_dates), size=len(unique_dates))
    return np.concatenate([rows_by_date[i] for i in drawn])


def bootstrap_weights(dates: np.ndarray, seed: int) -> np.ndarray:
    """Per-row draw counts of the same bootstrap; rows on undrawn dates get 0."""
    return np.bincount(bootstrap_positions(dates, seed), minlength=len(dates)).astype(float)


def _new_member(hyper: ModelConfig, seed: int) -> GradientBoostingRegressor:
    return GradientBoostingRegressor(
        loss="quantile",
        alpha=hyper.alpha,
        n_estimators=hyper.n_estimators,
        max_depth=hyper.max_depth,
        learning_rate=hyper.learning_rate,
        min_samples_leaf=hyper.min_samples_leaf,
        subsample=1.0,
        max_features=None,
        random_state=seed,
    )


def fit_ensemble(
    training_rows: pd.DataFrame,
    feature_list: Sequence[str],
    hyper: Optional[ModelConfig] = None,
    seed: int = 0,
    pool: Optional[WorkerPool] = None,
) -> QuantileEnsemble:
    """
    Fit the quantile ensemble on one training window.

    Args:
        training_rows: Feature rows with ``date`` and the next-day return in ``label``
        feature_list: Ordered model features
        hyper: Booster settings and ensemble size
        seed: Base seed
        pool: Optional worker pool for fitting members concurrently

    Returns:
        Immutable QuantileEnsemble

    Raises:
        EnsembleFitError: Too few labelled rows or missing feature columns
    """
    hyper = hyper or ModelConfig()
    missing = [c for c in feature_list if c not in training_rows.columns]
    if missing:
        raise EnsembleFitError(f"Training rows lack features {missing}")

    rows = training_rows[training_rows[LABEL_COLUMN].notna()]
    if len(rows) < hyper.min_train_rows:
        raise EnsembleFitError(
            f"Only {len(rows)} labelled training rows; at least {hyper.min_train_rows} required"
        )

    medians = training_medians(rows, feature_list)
    X = impute_with_medians(rows[list(feature_list)], medians).to_numpy(dtype=float)
    y = rows[LABEL_COLUMN].to_numpy(dtype=float)
    dates = rows["date"].to_numpy()
    member_seeds = tuple(seed ^ b for b in range(hyper.n_members))

    def fit_member(member_seed: int) -> GradientBoostingRegressor:
        weights = bootstrap_weights(dates, member_seed)
        drawn = weights > 0
        model = _new_member(hyper, member_seed)
        model.fit(X[drawn], y[drawn], sample_weight=weights[drawn])
        return model

    pool = pool or WorkerPool(max_workers=1)
    members = tuple(pool.map_ordered(fit_member, member_seeds))

    window = (pd.Timestamp(dates.min()).strftime("%Y-%m-%d"), pd.Timestamp(dates.max()).strftime("%Y-%m-%d"))
    logger.info(f"Fitted {len(members)}-member quantile ensemble on {len(rows)} rows ({window[0]}..{window[1]})")
    return QuantileEnsemble(
        members=members,
        feature_list=tuple(feature_list),
        medians=medians,
        alpha=hyper.alpha,
        seed=seed,
        window=window,
        n_rows=len(rows),
        member_seeds=member_seeds,
    )


def member_predictions(ensemble: QuantileEnsemble, rows: pd.DataFrame) -> np.ndarray:
    """
    Member forecasts for many rows, shape (n_rows, n_members).

    Raises:
        PredictionError: If rows lack any of the ensemble's features
    """
    missing = [c for c in ensemble.feature_list if c not in rows.columns]
    if missing:
        raise PredictionError(f"Feature-list mismatch: rows lack {missing}")
    X = impute_with_medians(rows[list(ensemble.feature_list)], ensemble.medians).to_numpy(dtype=float)
    return np.column_stack([member.predict(X) for member in ensemble.members])


def predict(
    ensemble: QuantileEnsemble, x: Mapping[str, float], calibration: Optional[CalibrationState] = None
) -> TailForecast:
    """
    Forecast for one feature row: member predictions and their mean q_raw.

    With a calibration the forecast also carries q_cal = q_raw + c_t;
    without one q_cal stays None until the caller calibrates.
    """
    row = pd.DataFrame([dict(x)])
    preds = member_predictions(ensemble, row)[0]
    q_raw = float(np.mean(preds))
    return TailForecast(
        symbol=str(x.get("symbol", "")),
        date=pd.Timestamp(x["date"]) if "date" in x else pd.NaT,
        member_preds=tuple(float(p) for p in preds),
        q_raw=q_raw,
        q_cal=None if calibration is None else apply_calibration(q_raw, calibration.c_t),
    )
