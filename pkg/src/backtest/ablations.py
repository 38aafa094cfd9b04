"""
Fallback-component and quality-layer ablations.

Fallback variants differ only in how the safe output is formed from the
same forecasts, so they are recomputed from a single run's records. Only
dropping the quality feature changes the forecasts and needs its own run.
"""

from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional

import pandas as pd

from src.backtest.engine import BacktestResult, run_backtest
from src.backtest.metrics import METHODS, alert_summary, evaluate
from src.config import RunConfig
from src.faults import FaultLog, corrupt_panel
from src.models import AlertLevel, BacktestRecord, PanelDataset, records_frame
from src.services.pool import WorkerPool
from src.services.safe_output import SafeOutputPolicy, decide
from src.utils.logger import get_logger

logger = get_logger(__name__)


def _raw(config: RunConfig) -> SafeOutputPolicy:
    return SafeOutputPolicy(uncertainty_coef=0.0, quality_coef=0.0, use_anchor=False)


def _simple(config: RunConfig) -> SafeOutputPolicy:
    return SafeOutputPolicy(uncertainty_coef=0.0, quality_coef=0.0)


def _quality_only(config: RunConfig) -> SafeOutputPolicy:
    return SafeOutputPolicy(uncertainty_coef=0.0, quality_coef=config.safe_output.quality_coef)


def _uncertainty_only(config: RunConfig) -> SafeOutputPolicy:
    return SafeOutputPolicy(uncertainty_coef=config.safe_output.uncertainty_coef, quality_coef=0.0)


def _full(config: RunConfig) -> SafeOutputPolicy:
    return SafeOutputPolicy.from_config(config.safe_output)


def _no_quality_service(config: RunConfig) -> SafeOutputPolicy:
    return SafeOutputPolicy(
        uncertainty_coef=config.safe_output.uncertainty_coef, quality_coef=0.0, quality_in_alert=False
    )


# Fallback variant registry, in table order
FALLBACK_VARIANTS: Dict[str, Callable[[RunConfig], SafeOutputPolicy]] = {
    "raw": _raw,
    "simple": _simple,
    "quality_only": _quality_only,
    "uncertainty_only": _uncertainty_only,
    "full": _full,
}

QUALITY_EXPERIMENTS = ("corrupt_full", "no_quality_feature", "no_quality_service")


def apply_policy(
    records: List[BacktestRecord], policy: SafeOutputPolicy, config: RunConfig
) -> List[BacktestRecord]:
    """Re-derive every record's safe decision under another policy."""
    out = []
    for r in records:
        decision = decide(
            r.q_cal,
            r.var_hist63,
            r.scale_s,
            r.uncertainty.score_u,
            r.quality.score_q,
            r.quality.state,
            r.uncertainty.label,
            r.uncertainty.u_drift,
            policy,
            config.alerts,
        )
        out.append(replace(r, decision=decision, q_safe=decision.q_safe))
    return out


def _safe_metrics(records: List[BacktestRecord], alpha: float) -> Dict[str, float]:
    frame = records_frame(records)
    table = evaluate(
        frame,
        alpha,
        slices={"overall": pd.Series(True, index=frame.index), "stress": frame["stress"].astype(bool)},
        methods={"safe": METHODS["safe"]},
    )
    overall, stress = table.get("overall", "safe"), table.get("stress", "safe")
    counts = alert_summary(frame, len(frame))["alerts"]
    return {
        "overall": overall.breach_rate,
        "stress": stress.breach_rate,
        "pinball": overall.pinball,
        "count": overall.count,
        **{f"alerts_{level.value.lower()}": counts[level.value] for level in AlertLevel},
    }


@dataclass
class AblationResult:
    fallback_table: pd.DataFrame
    quality_table: pd.DataFrame
    clean: BacktestResult
    corrupted: BacktestResult
    no_quality_feature: BacktestResult
    fault_log: FaultLog


def fallback_table(clean: BacktestResult, corrupted: BacktestResult, config: RunConfig) -> pd.DataFrame:
    """Safe breach rates per variant, clean and corrupted, overall and stress."""
    rows = []
    for name, make_policy in FALLBACK_VARIANTS.items():
        policy = make_policy(config)
        row: Dict[str, object] = {"variant": name}
        for label, result in (("clean", clean), ("corrupted", corrupted)):
            m = _safe_metrics(apply_policy(result.records, policy, config), config.alpha)
            row[f"{label}_overall"] = m["overall"]
            row[f"{label}_stress"] = m["stress"]
        rows.append(row)
    return pd.DataFrame(rows)


def quality_table(
    corrupted: BacktestResult, no_quality_feature: BacktestResult, config: RunConfig
) -> pd.DataFrame:
    """Overall and stress breach rates, pinball and alert counts per quality experiment."""
    full = FALLBACK_VARIANTS["full"](config)
    runs = {
        "corrupt_full": apply_policy(corrupted.records, full, config),
        "no_quality_feature": apply_policy(no_quality_feature.records, full, config),
        "no_quality_service": apply_policy(corrupted.records, _no_quality_service(config), config),
    }
    return pd.DataFrame(
        [{"experiment": name, **_safe_metrics(records, config.alpha)} for name, records in runs.items()]
    )


def run_ablations(
    panel: PanelDataset,
    config: RunConfig,
    seed: Optional[int] = None,
    pool: Optional[WorkerPool] = None,
) -> AblationResult:
    """
    Clean and corrupted runs plus the variant grids.

    Corruption touches only prediction-span rows; every run is scored
    against the clean panel's returns.
    """
    seed = config.run.seed if seed is None else seed
    own_pool = pool is None
    pool = pool or WorkerPool(max_workers=config.run.threads)
    try:
        clean = run_backtest(panel, config, seed, pool=pool)
        corrupted_panel, log = corrupt_panel(
            panel, eligible_dates=clean.schedule.evaluation_dates, config=config.faults
        )
        corrupted = run_backtest(corrupted_panel, config, seed, eval_panel=panel, pool=pool)
        no_qf_config = config.with_overrides(features={"include_quality_feature": False})
        no_quality_feature = run_backtest(corrupted_panel, no_qf_config, seed, eval_panel=panel, pool=pool)
    finally:
        if own_pool:
            pool.shutdown()

    logger.info(f"Ablations complete: {len(log)} corrupted rows")
    return AblationResult(
        fallback_table=fallback_table(clean, corrupted, config),
        quality_table=quality_table(corrupted, no_quality_feature, config),
        clean=clean,
        corrupted=corrupted,
        no_quality_feature=no_quality_feature,
        fault_log=log,
    )
