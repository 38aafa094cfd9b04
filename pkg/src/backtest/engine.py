"""
Walk-forward backtest engine.

At each refit the engine fits the pooled ensemble, the calibration offset,
the OOD reference and one GJR-GARCH per symbol. It then walks the prediction
span day by day, producing one record per symbol-day from information dated
on or before that day. Realized next-day returns only enter the evaluation
section of a record.
"""

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from src.baselines import GarchState, ewma_var, fit_gjr_garch, garch_step, garch_var, roll_forward, rolling_hist_var
from src.baselines.ewma import GAUSSIAN_5PCT
from src.baselines.garch import GarchFit
from src.backtest.schedule import RefitWindow, Schedule, build_schedule
from src.backtest.stress import label_stress
from src.config import RunConfig
from src.data.features import compute_features, impute_with_medians, model_feature_columns
from src.exceptions import ModelError
from src.models import (
    BacktestRecord,
    PanelDataset,
    QualityReport,
    QualityState,
    UncertaintyLabel,
    UncertaintyReport,
    UncertaintyState,
)
from src.quality import assess_frame, worst_quality_report
from src.risk import (
    LABEL_COLUMN,
    QuantileEnsemble,
    apply_calibration,
    fit_calibration,
    fit_ensemble,
    member_predictions,
)
from src.risk.calibration import CalibrationState
from src.risk.persistence import save_ensemble
from src.services.pool import WorkerPool
from src.services.safe_output import SafeOutputPolicy, decide
from src.uncertainty import DriftTracker, assess_uncertainty, fit_ood, ood_scores
from src.uncertainty.scoring import drift_score
from src.utils.logger import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class RefitDiagnostics:
    """What was fitted at one refit point."""

    refit: int
    train_start: str
    train_end: str
    pred_start: str
    pred_end: str
    n_train_rows: int
    c_t: float
    n_residuals: int
    calibration_mode: str
    ood_components: int
    ood_degenerate: bool
    d_ref: float
    garch: Dict[str, Optional[Dict[str, Any]]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class BacktestResult:
    records: List[BacktestRecord]
    refits: List[RefitDiagnostics]
    schedule: Schedule
    feature_list: List[str]
    symbols: List[str]

    @property
    def expected_records(self) -> int:
        return len(self.symbols) * len(self.schedule.evaluation_dates)


@dataclass
class _RefitModels:
    """Immutable snapshots shared by every day of one prediction span."""

    ensemble: QuantileEnsemble
    calibration: CalibrationState
    preds: np.ndarray
    u_ood: np.ndarray


def _optional(value: Any) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return None if math.isnan(value) else value


def _quality_from_row(row: pd.Series) -> QualityReport:
    return QualityReport(
        q_miss=float(row["q_miss"]),
        q_ohlc=float(row["q_ohlc"]),
        q_jump=float(row["q_jump"]),
        q_vol=float(row["q_vol"]),
        q_stale=float(row["q_stale"]),
        score_q=float(row["score_q"]),
        state=QualityState(row["quality_state"]),
    )


def prepare_frame(panel: PanelDataset, config: RunConfig) -> pd.DataFrame:
    """
    Features, quality columns, labels and historical anchors for every row.

    The label is the same symbol's next observed return; it is used only for
    fitting on rows whose next day lies inside the training window.
    """
    frame = compute_features(panel, config=config.features)
    frame = pd.concat([frame, assess_frame(frame, config.quality)], axis=1)

    by_symbol = frame.groupby("symbol", sort=False)["return"]
    frame[LABEL_COLUMN] = by_symbol.shift(-1)

    alpha = config.alpha
    hist_long = config.baselines.hist_window
    hist_short = config.safe_output.anchor_window
    frame["var_hist252"] = by_symbol.transform(lambda s: rolling_hist_var(s, hist_long, alpha))
    frame["var_hist63"] = by_symbol.transform(lambda s: rolling_hist_var(s, hist_short, alpha))
    return frame


def _fit_garch_for_symbols(
    frame: pd.DataFrame,
    train_dates: pd.DatetimeIndex,
    symbols: Sequence[str],
    config: RunConfig,
    pool: WorkerPool,
) -> Dict[str, Optional[Tuple[GarchFit, GarchState]]]:
    in_window = frame[frame["date"].isin(train_dates)]

    def fit_one(symbol: str) -> Optional[Tuple[GarchFit, GarchState]]:
        returns = in_window.loc[in_window["symbol"] == symbol, "return"].to_numpy(dtype=float)
        fit = fit_gjr_garch(returns, config.baselines)
        if fit is None:
            return None
        return fit, roll_forward(fit.params, returns, fit.sample_variance)

    return dict(zip(symbols, pool.map_ordered(fit_one, symbols)))


def _calibrate(
    frame: pd.DataFrame,
    calib_dates: pd.DatetimeIndex,
    ensemble: QuantileEnsemble,
    previous: Optional[QuantileEnsemble],
    config: RunConfig,
) -> Tuple[CalibrationState, str]:
    rows = frame[frame["date"].isin(calib_dates) & frame[LABEL_COLUMN].notna()]
    source, mode = ensemble, "in_sample"
    if config.calibration.mode == "previous_ensemble" and previous is not None:
        source, mode = previous, "previous_ensemble"
    window = (calib_dates[0].strftime("%Y-%m-%d"), calib_dates[-1].strftime("%Y-%m-%d"))
    if rows.empty:
        return fit_calibration(np.zeros(0), np.zeros(0), config.alpha, window), mode
    q_raw = member_predictions(source, rows).mean(axis=1)
    return fit_calibration(q_raw, rows[LABEL_COLUMN].to_numpy(dtype=float), config.alpha, window), mode


def _conservative_record(
    row: pd.Series,
    refit: int,
    c_t: float,
    preds: Optional[np.ndarray],
    tracker: DriftTracker,
    var_gjr: Optional[float],
    config: RunConfig,
    policy: SafeOutputPolicy,
) -> BacktestRecord:
    """Record for a symbol-day whose normal path failed: worst quality, maximal uncertainty."""
    symbol = row["symbol"]
    scale_s = _optional(row.get("scale_s")) or config.features.scale_floor
    var_hist63 = _optional(row.get("var_hist63"))
    var_hist252 = _optional(row.get("var_hist252"))
    var_ewma = ewma_var(_optional(row.get("ewma_vol")), config.baselines.ewma_multiplier)

    member_preds: Tuple[float, ...] = ()
    q_raw: Optional[float] = None
    if preds is not None and np.all(np.isfinite(preds)):
        member_preds = tuple(float(p) for p in preds)
        q_raw = float(np.mean(preds))
    if q_raw is None:
        candidates = [v for v in (var_hist63, var_hist252, var_ewma) if v is not None]
        q_raw = candidates[0] if candidates else GAUSSIAN_5PCT * scale_s
    q_cal = apply_calibration(q_raw, c_t)

    quality = worst_quality_report()
    u_drift = drift_score(tracker, symbol, config.alpha, config.uncertainty)
    uncertainty = UncertaintyReport(
        u_model=1.0,
        u_ood=1.0,
        u_drift=u_drift,
        score_u=1.0,
        state=UncertaintyState.ELEVATED,
        label=UncertaintyLabel.HIGH,
    )
    tracker.push_score(symbol, uncertainty.score_u)
    decision = decide(
        q_cal, var_hist63, scale_s, 1.0, 1.0, quality.state, uncertainty.label, u_drift, policy, config.alerts
    )
    tracker.record_forecast(symbol, row["date"], q_cal)
    return BacktestRecord(
        symbol=symbol,
        date=pd.Timestamp(row["date"]),
        refit=refit,
        scale_s=scale_s,
        member_preds=member_preds,
        q_raw=q_raw,
        q_cal=q_cal,
        q_safe=decision.q_safe,
        var_hist252=var_hist252,
        var_hist63=var_hist63,
        var_ewma=var_ewma,
        var_gjr=var_gjr,
        quality=quality,
        uncertainty=uncertainty,
        decision=decision,
        fallback=True,
    )


def _service_record(
    row: pd.Series,
    refit: int,
    preds: np.ndarray,
    u_ood: float,
    c_t: float,
    tracker: DriftTracker,
    var_gjr: Optional[float],
    config: RunConfig,
    policy: SafeOutputPolicy,
) -> BacktestRecord:
    """Quality, forecast, uncertainty and safe decision for one symbol-day."""
    symbol = row["symbol"]
    quality = _quality_from_row(row)
    scale_s = float(row["scale_s"])

    q_raw = float(np.mean(preds))
    q_cal = apply_calibration(q_raw, c_t)
    uncertainty = assess_uncertainty(
        tracker, symbol, preds, scale_s, float(u_ood), config.alpha, config.uncertainty
    )
    var_hist63 = _optional(row["var_hist63"])
    decision = decide(
        q_cal,
        var_hist63,
        scale_s,
        uncertainty.score_u,
        quality.score_q,
        quality.state,
        uncertainty.label,
        uncertainty.u_drift,
        policy,
        config.alerts,
    )
    tracker.record_forecast(symbol, row["date"], q_cal)
    return BacktestRecord(
        symbol=symbol,
        date=pd.Timestamp(row["date"]),
        refit=refit,
        scale_s=scale_s,
        member_preds=tuple(float(p) for p in preds),
        q_raw=q_raw,
        q_cal=q_cal,
        q_safe=decision.q_safe,
        var_hist252=_optional(row["var_hist252"]),
        var_hist63=var_hist63,
        var_ewma=ewma_var(_optional(row["ewma_vol"]), config.baselines.ewma_multiplier),
        var_gjr=var_gjr,
        quality=quality,
        uncertainty=uncertainty,
        decision=decision,
    )


def _realized_returns(panel: PanelDataset) -> Dict[Tuple[str, pd.Timestamp], float]:
    """(symbol, t) -> r_{t+1} from a panel's bars."""
    bars = panel.bars.sort_values(["symbol", "date"])
    nxt = bars.groupby("symbol", sort=False)["return"].shift(-1)
    return {
        (s, pd.Timestamp(d)): float(v)
        for s, d, v in zip(bars["symbol"], bars["date"], nxt)
        if not pd.isna(v)
    }


def run_backtest(
    panel: PanelDataset,
    config: RunConfig,
    seed: Optional[int] = None,
    eval_panel: Optional[PanelDataset] = None,
    policy: Optional[SafeOutputPolicy] = None,
    pool: Optional[WorkerPool] = None,
    artifact_dir: Optional[Path] = None,
) -> BacktestResult:
    """
    Run the walk-forward protocol over a panel.

    Args:
        panel: Service-time panel (possibly corrupted)
        config: Run configuration
        seed: Base seed (defaults to config.run.seed); refit k uses seed + k
        eval_panel: Panel whose returns score the forecasts (defaults to ``panel``)
        policy: Safe-output policy (defaults to the configured full service)
        pool: Worker pool for member and per-symbol GARCH fits
        artifact_dir: When given, one ensemble artifact per refit is written here

    Returns:
        BacktestResult with one record per symbol and prediction date

    Raises:
        ScheduleError: If the calendar is too short
        EnsembleFitError: If a training window has too few labelled rows
    """
    seed = config.run.seed if seed is None else seed
    policy = policy or SafeOutputPolicy.from_config(config.safe_output)
    own_pool = pool is None
    pool = pool or WorkerPool(max_workers=config.run.threads)

    schedule = build_schedule(
        panel.dates, config.windows.train_len, config.windows.step, config.calibration.window
    )
    symbols = panel.symbols
    frame = prepare_frame(panel, config)
    feature_list = model_feature_columns(config.features, symbols)
    tracker = DriftTracker.from_config(config.uncertainty)

    records: List[BacktestRecord] = []
    diagnostics: List[RefitDiagnostics] = []
    previous: Optional[QuantileEnsemble] = None

    try:
        for refit in schedule.refits:
            models, garch, diag = _fit_refit(
                frame, schedule, refit, feature_list, symbols, previous, config, seed, pool
            )
            diagnostics.append(diag)
            previous = models.ensemble
            if artifact_dir is not None:
                save_ensemble(models.ensemble, str(Path(artifact_dir) / f"refit_{refit.index:03d}.joblib"))
            records.extend(
                _walk_span(frame, schedule, refit, models, garch, symbols, tracker, config, policy)
            )
    finally:
        if own_pool:
            pool.shutdown()

    realized = _realized_returns(eval_panel or panel)
    records = [r.with_evaluation(realized_return=realized.get((r.symbol, r.date))) for r in records]
    records = label_stress(records, (eval_panel or panel).macro["vix"], config.run.stress_quantile)

    logger.info(
        f"Backtest produced {len(records)} records over {len(schedule.refits)} refits",
        extra={"mode": config.calibration.mode},
    )
    return BacktestResult(
        records=records,
        refits=diagnostics,
        schedule=schedule,
        feature_list=feature_list,
        symbols=symbols,
    )


def _fit_refit(
    frame: pd.DataFrame,
    schedule: Schedule,
    refit: RefitWindow,
    feature_list: List[str],
    symbols: List[str],
    previous: Optional[QuantileEnsemble],
    config: RunConfig,
    seed: int,
    pool: WorkerPool,
) -> Tuple[_RefitModels, Dict[str, Optional[Tuple[GarchFit, GarchState]]], RefitDiagnostics]:
    train_dates = schedule.train_dates(refit)
    pred_dates = schedule.prediction_dates(refit)
    training = frame[frame["date"].isin(train_dates)]

    ensemble = fit_ensemble(training, feature_list, config.model, seed + refit.index, pool)
    calibration, mode = _calibrate(frame, schedule.calibration_dates(refit), ensemble, previous, config)

    imputed_train = impute_with_medians(training[feature_list], ensemble.medians)
    ood = fit_ood(imputed_train, config.uncertainty)

    span = frame[frame["date"].isin(pred_dates)]
    imputed_span = impute_with_medians(span[feature_list], ensemble.medians)
    preds = member_predictions(ensemble, imputed_span)
    u_ood = ood_scores(ood, imputed_span, config.uncertainty)

    garch = _fit_garch_for_symbols(frame, train_dates, symbols, config, pool)

    logger.info(
        f"Refit {refit.index}: {ensemble.n_rows} training rows, c_t={calibration.c_t:.5f}, "
        f"{ood.n_components} OOD components",
        extra={"refit": refit.index, "date": pred_dates[0].strftime("%Y-%m-%d")},
    )
    diag = RefitDiagnostics(
        refit=refit.index,
        train_start=train_dates[0].strftime("%Y-%m-%d"),
        train_end=train_dates[-1].strftime("%Y-%m-%d"),
        pred_start=pred_dates[0].strftime("%Y-%m-%d"),
        pred_end=pred_dates[-1].strftime("%Y-%m-%d"),
        n_train_rows=ensemble.n_rows,
        c_t=calibration.c_t,
        n_residuals=calibration.n_residuals,
        calibration_mode=mode,
        ood_components=ood.n_components,
        ood_degenerate=ood.degenerate,
        d_ref=ood.d_ref,
        garch={
            s: None if g is None else {"converged": g[0].converged, "n_obs": g[0].n_obs, **asdict(g[0].params)}
            for s, g in garch.items()
        },
    )
    models = _RefitModels(
        ensemble=ensemble,
        calibration=calibration,
        preds=pd.DataFrame(preds, index=span.index).reindex(frame.index).to_numpy(),
        u_ood=pd.Series(u_ood, index=span.index).reindex(frame.index).to_numpy(),
    )
    return models, garch, diag


def _walk_span(
    frame: pd.DataFrame,
    schedule: Schedule,
    refit: RefitWindow,
    models: _RefitModels,
    garch: Dict[str, Optional[Tuple[GarchFit, GarchState]]],
    symbols: List[str],
    tracker: DriftTracker,
    config: RunConfig,
    policy: SafeOutputPolicy,
) -> List[BacktestRecord]:
    """Day loop over one prediction span."""
    pred_dates = schedule.prediction_dates(refit)
    span = frame[frame["date"].isin(pred_dates)]
    positions = {(s, d): i for i, s, d in zip(span.index, span["symbol"], span["date"])}
    states = {s: g[1] for s, g in garch.items() if g is not None}
    c_t = models.calibration.c_t

    records: List[BacktestRecord] = []
    for date in pred_dates:
        for symbol in symbols:
            idx = positions[(symbol, date)]
            row = frame.loc[idx]
            observed = _optional(row["return"])
            tracker.resolve(symbol, observed)

            var_gjr: Optional[float] = None
            if symbol in states:
                states[symbol] = garch_step(garch[symbol][0].params, states[symbol], observed, date)  # type: ignore[index]
                var_gjr = garch_var(garch[symbol][0].params, states[symbol], config.alpha)  # type: ignore[index]

            preds = models.preds[idx]
            try:
                if not np.all(np.isfinite(preds)):
                    raise ModelError(f"Non-finite member predictions for {symbol} on {date.date()}")
                record = _service_record(
                    row, refit.index, preds, models.u_ood[idx], c_t, tracker, var_gjr, config, policy
                )
            except Exception as e:
                logger.error(
                    f"Service path failed, emitting conservative record: {e}",
                    exc_info=True,
                    extra={"symbol": symbol, "date": date.strftime("%Y-%m-%d"), "refit": refit.index},
                )
                record = _conservative_record(row, refit.index, c_t, preds, tracker, var_gjr, config, policy)
            records.append(record)
    return records


def audit_causality(
    panel: PanelDataset,
    config: RunConfig,
    records: Sequence[BacktestRecord],
    n: int = 20,
    seed: int = 0,
) -> List[Tuple[str, str]]:
    """
    Recompute sampled records on panels truncated at their dates.

    Returns:
        (symbol, date) keys whose service section differs; empty when causal
    """
    if not records:
        return []
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(records), size=min(n, len(records)), replace=False)
    by_date: Dict[pd.Timestamp, List[BacktestRecord]] = {}
    for i in sorted(picks):
        by_date.setdefault(records[i].date, []).append(records[i])

    mismatches: List[Tuple[str, str]] = []
    for date, expected in sorted(by_date.items()):
        truncated = run_backtest(panel.truncate(date), config, pool=WorkerPool(max_workers=1))
        recomputed = {(r.symbol, r.date): r for r in truncated.records}
        for record in expected:
            other = recomputed.get((record.symbol, record.date))
            if other is None or not _same_service(record, other):
                mismatches.append((record.symbol, date.strftime("%Y-%m-%d")))
    if mismatches:
        logger.warning(f"Causality audit found {len(mismatches)} mismatching records")
    return mismatches


def _same_service(a: BacktestRecord, b: BacktestRecord) -> bool:
    left, right = a.service_row(), b.service_row()
    for key, value in left.items():
        other = right[key]
        if isinstance(value, float) or isinstance(other, float):
            if value is None or other is None:
                if value is not other:
                    return False
            elif not (math.isclose(value, other, rel_tol=1e-12, abs_tol=1e-15) or (math.isnan(value) and math.isnan(other))):
                return False
        elif value != other:
            return False
    return a.member_preds == b.member_preds or np.allclose(a.member_preds, b.member_preds, rtol=1e-12, atol=0)
