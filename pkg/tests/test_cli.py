"""Command-line entry point."""

import json

import pytest
import yaml

from src.data import save_panel
from src.database import SessionLocal, init_database, repository
from src.entrypoints.cli import build_parser, main
from src.reports.writers import (
    ALERTS_FILE,
    FAULT_LOG_FILE,
    METRICS_FILE,
    RECORDS_FILE,
    ROLLING_FILE,
    TABLES_FILE,
)
from tests.conftest import FAST_CONFIG


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "monitor.yaml"
    path.write_text(yaml.safe_dump(FAST_CONFIG), encoding="utf-8")
    return path


def test_usage_error_exits_with_config_code():
    with pytest.raises(SystemExit) as excinfo:
        main(["backtest", "--no-such-flag"])
    assert excinfo.value.code == 1
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_missing_input_is_a_config_error(tmp_path):
    assert main(["validate", "--out", str(tmp_path)]) == 1


def test_missing_panel_file_is_a_data_error(tmp_path):
    assert main(["validate", "--panel", str(tmp_path / "absent.csv")]) == 2


def test_unknown_symbol_is_a_data_error(config_file):
    assert main(["validate", "--config", str(config_file), "--symbols", "NOPE"]) == 2


def test_bad_thread_count(config_file):
    assert main(["validate", "--config", str(config_file), "--threads", "0"]) == 1


def test_validate_prints_quality_summary(config_file, capsys):
    assert main(["validate", "--config", str(config_file)]) == 0
    out = capsys.readouterr().out
    assert "ETF01" in out
    assert "green" in out


def test_validate_reads_panel_csv(tmp_path, small_panel, capsys):
    path = tmp_path / "panel.csv"
    save_panel(small_panel, str(path))
    assert main(["validate", "--panel", str(path), "--symbols", "ETF01,ETF02"]) == 0
    out = capsys.readouterr().out
    assert "ETF02" in out
    assert "ETF03" not in out


def test_backtest_writes_artifacts_and_report_reads_them(config_file, tmp_path, capsys):
    out_dir = tmp_path / "run"
    assert main(["backtest", "--config", str(config_file), "--out", str(out_dir), "--save-models"]) == 0
    for name in (RECORDS_FILE, METRICS_FILE, ROLLING_FILE, ALERTS_FILE, TABLES_FILE):
        assert (out_dir / name).is_file()
    assert len(list((out_dir / "models").glob("refit_*.joblib"))) == 4

    summary = json.loads((out_dir / METRICS_FILE).read_text(encoding="utf-8"))
    assert summary["alerts"]["availability"] == 1.0
    assert summary["config"]["run"]["seed"] == 3
    assert summary["schedule"]["refits"] == 4
    capsys.readouterr()

    assert main(["report", "--out", str(out_dir)]) == 0
    assert "Safe VaR" in capsys.readouterr().out
    assert main(["report"]) == 0


def test_report_without_metrics_is_a_data_error(tmp_path):
    assert main(["report", "--out", str(tmp_path)]) == 2


@pytest.mark.slow
def test_corrupt_writes_fault_log(config_file, tmp_path):
    out_dir = tmp_path / "corrupt"
    assert main(["corrupt", "--config", str(config_file), "--out", str(out_dir)]) == 0
    summary = json.loads((out_dir / METRICS_FILE).read_text(encoding="utf-8"))
    assert summary["faults"]["corrupted_rows"] > 0
    assert (out_dir / "fault_log.csv").is_file()
    assert (out_dir / "corrupted_panel.csv").is_file()


@pytest.mark.parametrize("command", ["backtest", "corrupt", "ablate"])
def test_schedule_error_leaves_no_output(tmp_path, command):
    config = {**FAST_CONFIG, "windows": {"train_len": 500, "step": 50}}
    path = tmp_path / "short.yaml"
    path.write_text(yaml.safe_dump(config), encoding="utf-8")
    out_dir = tmp_path / "never"
    assert main([command, "--config", str(path), "--out", str(out_dir)]) == 2
    assert not out_dir.exists()


def test_runs_lists_and_deletes_stored_runs(capsys):
    init_database()
    db = SessionLocal()
    try:
        summary = {"alerts": {"records": 4, "availability": 1.0, "alerts": {"GREEN": 3, "ORANGE": 1, "RED": 0}}}
        run = repository.create_run(db, "corrupt", 17, "outputs/listed", {}, summary)
        run_id = run.id
    finally:
        db.close()

    assert main(["runs"]) == 0
    out = capsys.readouterr().out
    assert "outputs/listed" in out
    assert "alerts=3/1/0" in out

    assert main(["runs", "--delete", str(run_id)]) == 0
    assert f"Deleted run {run_id}" in capsys.readouterr().out
    assert main(["runs", "--delete", str(run_id)]) == 2


def _artifacts(out_dir):
    return {name: (out_dir / name).read_bytes() for name in (RECORDS_FILE, METRICS_FILE, ROLLING_FILE, ALERTS_FILE, TABLES_FILE)}


@pytest.mark.slow
def test_backtest_outputs_are_byte_identical_across_reruns(config_file, tmp_path):
    out_dir = tmp_path / "rerun"
    assert main(["backtest", "--config", str(config_file), "--out", str(out_dir)]) == 0
    first = _artifacts(out_dir)
    assert main(["backtest", "--config", str(config_file), "--out", str(out_dir)]) == 0
    assert _artifacts(out_dir) == first


@pytest.mark.slow
def test_ablate_writes_both_tables(config_file, tmp_path, capsys):
    out_dir = tmp_path / "ablate"
    assert main(["ablate", "--config", str(config_file), "--out", str(out_dir)]) == 0
    summary = json.loads((out_dir / METRICS_FILE).read_text(encoding="utf-8"))
    fallback = summary["ablations"]["fallback"]
    assert [r["variant"] for r in fallback] == ["raw", "simple", "quality_only", "uncertainty_only", "full"]
    quality = summary["ablations"]["quality"]
    assert [r["experiment"] for r in quality] == ["corrupt_full", "no_quality_feature", "no_quality_service"]
    counts = summary["ablations"]["feature_counts"]
    assert counts["no_quality_feature"] == counts["full"] - 1
    assert (out_dir / FAULT_LOG_FILE).is_file()
    out = capsys.readouterr().out
    assert "Fallback components" in out
    assert "Quality-layer ablation" in out
