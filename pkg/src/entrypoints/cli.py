"""
Command-line entry point.
Loads the run configuration, builds the panel and dispatches to the
validate, backtest, corrupt, ablate, report and runs commands.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd

from src.backtest import Schedule, build_schedule, run_ablations, run_backtest
from src.config import RunConfig, settings
from src.data import compute_features, generate_synthetic_panel, load_panel, save_panel
from src.database import SessionLocal, init_database, repository
from src.exceptions import ConfigError, DataError, MonitorError
from src.faults import corrupt_panel
from src.models import PanelDataset, QualityState
from src.quality import assess_frame
from src.reports import build_summary, fault_summary, prepare_output_dir, read_summary, render_report, write_json, write_run
from src.reports.writers import FAULT_LOG_FILE, METRICS_FILE, TABLES_FILE
from src.services.pool import WorkerPool
from src.utils.logger import get_logger, setup_logging

logger = get_logger(__name__)


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with the configuration error code."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(ConfigError.exit_code, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="etf-monitor", description="Reliability-aware ETF tail-risk monitor")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="Run configuration YAML")
        p.add_argument("--seed", type=int, help="Base random seed")
        p.add_argument("--threads", type=int, help="Worker threads for model fitting")
        p.add_argument("--out", help="Output directory")
        p.add_argument("--synthetic", action="store_true", default=None, help="Use the synthetic panel generator")
        p.add_argument("--symbols", help="Comma-separated symbols to keep")
        p.add_argument("--panel", help="Panel CSV (overrides data.panel_path)")
        p.add_argument("--macro", help="Macro CSV (overrides data.macro_path)")

    validate = sub.add_parser("validate", help="Ingest a panel and summarize its quality flags")
    common(validate)

    backtest = sub.add_parser("backtest", help="Walk-forward backtest on the clean panel")
    common(backtest)
    backtest.add_argument("--save-models", action="store_true", default=None, help="Persist each refit's ensemble")

    corrupt = sub.add_parser("corrupt", help="Backtest on a panel with injected service-time faults")
    common(corrupt)

    ablate = sub.add_parser("ablate", help="Fallback-component and quality-layer ablations")
    common(ablate)

    report = sub.add_parser("report", help="Print the tables of a finished run")
    report.add_argument("--out", help="Output directory holding metrics.json")
    report.add_argument("--run-id", type=int, help="Stored run id (latest stored run when omitted)")

    runs = sub.add_parser("runs", help="List stored runs or delete one")
    runs.add_argument("--limit", type=int, default=20, help="Number of newest runs to list")
    runs.add_argument("--delete", type=int, metavar="RUN_ID", help="Delete a stored run")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file (or defaults) with command-line overrides applied."""
    config = RunConfig.from_yaml(args.config) if args.config else RunConfig()
    symbols = [s.strip() for s in args.symbols.split(",") if s.strip()] if args.symbols else None
    if args.threads is not None and args.threads < 1:
        raise ConfigError("--threads must be at least 1")
    return config.with_overrides(
        data={
            "use_synthetic": args.synthetic,
            "symbols": symbols,
            "panel_path": args.panel,
            "macro_path": args.macro,
        },
        run={
            "seed": args.seed,
            "threads": args.threads,
            "output_dir": args.out,
            "save_models": getattr(args, "save_models", None),
        },
    )


def load_run_panel(config: RunConfig) -> PanelDataset:
    """Panel from the configured CSV or the synthetic generator."""
    if config.data.use_synthetic:
        syn = config.synthetic
        panel = generate_synthetic_panel(syn.n_symbols, syn.n_days, syn.seed, config=syn)
    elif config.data.panel_path:
        panel = load_panel(config.data.panel_path, macro_path=config.data.macro_path)
    else:
        raise ConfigError("No input panel: set data.panel_path, pass --panel, or use --synthetic")

    if config.data.symbols:
        try:
            panel = panel.select_symbols(list(config.data.symbols))
        except KeyError as e:
            raise DataError(str(e)) from e
    logger.info(f"Loaded panel: {len(panel.symbols)} symbols x {len(panel.dates)} dates")
    return panel


def _record_run(command: str, seed: int, out_dir: Path, summary: Dict[str, Any]) -> Optional[int]:
    if not settings.record_runs:
        return None
    init_database()
    db = SessionLocal()
    try:
        run = repository.create_run(
            db, command=command, seed=seed, output_dir=str(out_dir), config=summary["config"], summary=summary
        )
        logger.info(f"Recorded run {run.id}", extra={"run_id": run.id, "command": command})
        return run.id
    finally:
        db.close()


def quality_summary(panel: PanelDataset, config: RunConfig) -> pd.DataFrame:
    """Per-symbol counts of quality flags and states."""
    frame = compute_features(panel, config=config.features)
    quality = pd.concat([frame[["symbol"]], assess_frame(frame, config.quality)], axis=1)
    grouped = quality.groupby("symbol", sort=True)
    summary = pd.DataFrame(
        {
            "rows": grouped.size(),
            "missing": grouped["q_miss"].apply(lambda s: int((s > 0).sum())),
            "ohlc": grouped["q_ohlc"].apply(lambda s: int((s >= 1).sum())),
            "jump": grouped["q_jump"].apply(lambda s: int((s >= 1).sum())),
            "stale": grouped["q_stale"].apply(lambda s: int((s >= 1).sum())),
        }
    )
    for state in QualityState:
        summary[state.value.lower()] = grouped["quality_state"].apply(lambda s, v=state.value: int((s == v).sum()))
    return summary.reset_index()


def cmd_validate(config: RunConfig) -> int:
    panel = load_run_panel(config)
    summary = quality_summary(panel, config)
    print(summary.to_string(index=False))
    return 0


def _pool(config: RunConfig) -> WorkerPool:
    return WorkerPool(max_workers=config.run.threads)


def plan_schedule(panel: PanelDataset, config: RunConfig) -> Schedule:
    """Walk-forward schedule of the panel; raises ScheduleError before anything is written."""
    return build_schedule(
        panel.dates, config.windows.train_len, config.windows.step, config.calibration.window
    )


def cmd_backtest(config: RunConfig) -> int:
    panel = load_run_panel(config)
    plan_schedule(panel, config)
    out_dir = prepare_output_dir(config.run.output_dir)
    artifact_dir = out_dir / "models" if config.run.save_models else None
    with _pool(config) as pool:
        result = run_backtest(panel, config, pool=pool, artifact_dir=artifact_dir)
    summary = build_summary("backtest", result, panel, config, config.run.seed)
    write_run(out_dir, summary, result, config)
    _record_run("backtest", config.run.seed, out_dir, summary)
    print(render_report(summary))
    return 0


def cmd_corrupt(config: RunConfig) -> int:
    panel = load_run_panel(config)
    schedule = plan_schedule(panel, config)
    out_dir = prepare_output_dir(config.run.output_dir)
    corrupted, log = corrupt_panel(panel, eligible_dates=schedule.evaluation_dates, config=config.faults)
    with _pool(config) as pool:
        result = run_backtest(corrupted, config, eval_panel=panel, pool=pool)
    summary = build_summary("corrupt", result, corrupted, config, config.run.seed)
    summary["faults"] = fault_summary(log)
    write_run(out_dir, summary, result, config, fault_log=log)
    save_panel(corrupted, str(out_dir / "corrupted_panel.csv"))
    _record_run("corrupt", config.run.seed, out_dir, summary)
    print(render_report(summary))
    return 0


def cmd_ablate(config: RunConfig) -> int:
    panel = load_run_panel(config)
    plan_schedule(panel, config)
    out_dir = prepare_output_dir(config.run.output_dir)
    with _pool(config) as pool:
        ablation = run_ablations(panel, config, pool=pool)
    summary = build_summary("ablate", ablation.clean, panel, config, config.run.seed)
    summary["faults"] = fault_summary(ablation.fault_log)
    summary["ablations"] = {
        "fallback": ablation.fallback_table.to_dict("records"),
        "quality": ablation.quality_table.to_dict("records"),
        "feature_counts": {
            "full": len(ablation.corrupted.feature_list),
            "no_quality_feature": len(ablation.no_quality_feature.feature_list),
        },
    }
    write_run(out_dir, summary, ablation.clean, config, fault_log=ablation.fault_log)
    _record_run("ablate", config.run.seed, out_dir, summary)
    print(render_report(summary))
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    if args.out:
        summary = read_summary(args.out)
    else:
        init_database()
        db = SessionLocal()
        try:
            run = repository.get_by_id(db, args.run_id) if args.run_id else repository.get_latest(db)
            if run is None:
                raise DataError(f"No stored run {args.run_id if args.run_id else '(store is empty)'}")
            summary = run.summary
        finally:
            db.close()
    print(render_report(summary))
    return 0


def cmd_runs(args: argparse.Namespace) -> int:
    init_database()
    db = SessionLocal()
    try:
        if args.delete is not None:
            if not repository.delete_run(db, args.delete):
                raise DataError(f"No stored run {args.delete}")
            print(f"Deleted run {args.delete}")
            return 0
        runs = repository.list_runs(db, limit=args.limit)
    finally:
        db.close()

    if not runs:
        print("No stored runs.")
        return 0
    for run in runs:
        availability = "n/a" if run.availability is None else f"{100.0 * run.availability:.1f}%"
        print(
            f"{run.id:>4}  {run.command:<9} seed={run.seed:<6} records={run.n_records:<7} "
            f"availability={availability:<7} alerts={run.alerts_green}/{run.alerts_orange}/{run.alerts_red}  "
            f"{run.output_dir}"
        )
    return 0


COMMANDS: Dict[str, Callable[[RunConfig], int]] = {
    "validate": cmd_validate,
    "backtest": cmd_backtest,
    "corrupt": cmd_corrupt,
    "ablate": cmd_ablate,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command and return its exit code.

    0 success, 1 usage or configuration error, 2 data error, 3 model or
    internal error.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging("src")

    try:
        if args.command == "report":
            return cmd_report(args)
        if args.command == "runs":
            return cmd_runs(args)
        config = resolve_config(args)
        logger.info(f"Running {args.command}", extra={"command": args.command})
        return COMMANDS[args.command](config)
    except MonitorError as e:
        logger.error(f"{type(e).__name__}: {e}", extra={"command": args.command})
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True, extra={"command": args.command})
        print(f"internal error: {e}", file=sys.stderr)
        return 3
