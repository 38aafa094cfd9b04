"""
Run artifacts on disk.
"""

import json
import math
from pathlib import Path
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd

from src.backtest import BacktestResult, alert_summary, evaluate, rolling_breach_rates
from src.config import RunConfig
from src.exceptions import DataError
from src.faults import FaultLog
from src.models import PanelDataset, records_frame
from src.reports.tables import render_report
from src.utils.logger import get_logger

logger = get_logger(__name__)

RECORDS_FILE = "records.csv"
METRICS_FILE = "metrics.json"
ROLLING_FILE = "rolling_breach.csv"
ALERTS_FILE = "alerts_summary.json"
FAULT_LOG_FILE = "fault_log.csv"
TABLES_FILE = "tables.txt"


def to_jsonable(value: Any) -> Any:
    """NaN and infinities become null; numpy scalars become Python numbers."""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return None if math.isnan(value) or math.isinf(value) else value
    if isinstance(value, pd.Timestamp):
        return value.strftime("%Y-%m-%d")
    return value


def write_json(data: Dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(to_jsonable(data), sort_keys=True, indent=2) + "\n", encoding="utf-8")


def macro_coverage(panel: PanelDataset, result: BacktestResult) -> Optional[float]:
    """Fraction of prediction days with both yield tenors observed."""
    dates = result.schedule.evaluation_dates
    if len(dates) == 0 or not {"y3m", "y10y"} <= set(panel.macro.columns):
        return None
    return float(np.mean([panel.macro_snapshot(d).curve_available for d in dates]))


def build_summary(
    command: str,
    result: BacktestResult,
    panel: PanelDataset,
    config: RunConfig,
    seed: int,
) -> Dict[str, Any]:
    """Everything that goes into metrics.json for one run."""
    frame = records_frame(result.records)
    table = evaluate(frame, config.alpha)
    dates = result.schedule.evaluation_dates
    return {
        "command": command,
        "seed": seed,
        "config": config.echo(),
        "schedule": {
            "refits": len(result.schedule.refits),
            "first_prediction": dates[0].strftime("%Y-%m-%d") if len(dates) else None,
            "last_prediction": dates[-1].strftime("%Y-%m-%d") if len(dates) else None,
            "prediction_days": len(dates),
        },
        "symbols": result.symbols,
        "feature_list": result.feature_list,
        "metrics": table.to_dict(),
        "alerts": alert_summary(frame, result.expected_records, macro_coverage(panel, result)),
        "refits": [d.to_dict() for d in result.refits],
    }


def fault_summary(log: FaultLog) -> Dict[str, Any]:
    return {
        "corrupted_rows": len(log),
        "eligible_rows": log.eligible_rows,
        "probability": log.probability,
        "seed": log.seed,
        "modes": log.mode_counts(),
    }


def prepare_output_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise DataError(f"Cannot create output directory {path}: {e}") from e
    return out


def write_run(
    out_dir: Path,
    summary: Dict[str, Any],
    result: BacktestResult,
    config: RunConfig,
    fault_log: Optional[FaultLog] = None,
) -> None:
    """Write records, metrics, rolling breach rates, alert summary and tables."""
    frame = records_frame(result.records)
    frame.to_csv(out_dir / RECORDS_FILE, index=False, float_format="%.10g")
    rolling = rolling_breach_rates(frame, config.run.rolling_window)
    rolling.assign(date=pd.to_datetime(rolling["date"]).dt.strftime("%Y-%m-%d")).to_csv(
        out_dir / ROLLING_FILE, index=False, float_format="%.10g"
    )
    write_json(summary, out_dir / METRICS_FILE)
    write_json(summary["alerts"], out_dir / ALERTS_FILE)
    if fault_log is not None:
        fault_log.to_frame().to_csv(out_dir / FAULT_LOG_FILE, index=False)
    (out_dir / TABLES_FILE).write_text(render_report(summary), encoding="utf-8")
    logger.info(f"Wrote run artifacts to {out_dir}")


def read_summary(out_dir: str) -> Dict[str, Any]:
    path = Path(out_dir) / METRICS_FILE
    if not path.exists():
        raise DataError(f"No {METRICS_FILE} in {out_dir}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"Unreadable {path}: {e}") from e
