"""Structured log formatting."""

import json
import logging
import sys

from src.utils.logger import JSONFormatter, get_logger


def test_json_formatter_carries_extras():
    record = logging.LogRecord("src.backtest", logging.INFO, __file__, 10, "Refit %d done", (2,), None)
    record.refit = 2
    record.symbol = "SPY"
    payload = json.loads(JSONFormatter().format(record))
    assert payload["message"] == "Refit 2 done"
    assert payload["refit"] == "2"
    assert payload["symbol"] == "SPY"
    assert "run_id" not in payload


def test_json_formatter_includes_exception():
    try:
        raise ValueError("bad row")
    except ValueError:
        record = logging.LogRecord("src", logging.ERROR, __file__, 1, "failed", (), sys.exc_info())
    payload = json.loads(JSONFormatter().format(record))
    assert "ValueError: bad row" in payload["exception"]


def test_get_logger_returns_named_logger():
    assert get_logger("src.data").name == "src.data"
