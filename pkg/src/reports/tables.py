"""
Text tables built from a run summary (the content of metrics.json).

Every builder reads the JSON-safe summary so ``report`` can render a stored
run without recomputing anything.
"""

from typing import Any, Dict, List, Optional

import pandas as pd

METHOD_LABELS = {
    "model": "Model VaR",
    "safe": "Safe VaR",
    "hist252": "Historical VaR (252d)",
    "ewma": "EWMA VaR",
    "gjr": "GJR-GARCH VaR",
}

VARIANT_LABELS = {
    "raw": "Raw model",
    "simple": "Simple fallback",
    "quality_only": "Quality-only",
    "uncertainty_only": "Uncertainty-only",
    "full": "Full service",
}

EXPERIMENT_LABELS = {
    "corrupt_full": "Corrupt full service",
    "no_quality_feature": "No quality feature",
    "no_quality_service": "No quality service layer",
}


def _pct(value: Optional[float]) -> Optional[float]:
    return None if value is None else 100.0 * value


def _metric(summary: Dict[str, Any], slice_name: str, method: str) -> Dict[str, Any]:
    return summary.get("metrics", {}).get(slice_name, {}).get(method, {})


def method_table(summary: Dict[str, Any]) -> pd.DataFrame:
    """Overall breach rate, Kupiec statistic and pinball loss per method."""
    rows = []
    for method, label in METHOD_LABELS.items():
        m = _metric(summary, "overall", method)
        if not m:
            continue
        rows.append(
            {
                "Method": label,
                "N": m.get("count"),
                "Breach (%)": _pct(m.get("breach_rate")),
                "Kupiec LR": m.get("kupiec_lr"),
                "p-value": m.get("kupiec_p"),
                "Pinball": m.get("pinball"),
            }
        )
    return pd.DataFrame(rows)


def stress_table(summary: Dict[str, Any]) -> pd.DataFrame:
    """Breach rates by method in calm and stressed regimes."""
    rows = []
    for method, label in METHOD_LABELS.items():
        calm, stress = _metric(summary, "non_stress", method), _metric(summary, "stress", method)
        if not calm and not stress:
            continue
        rows.append(
            {
                "Method": label,
                "Non-stress (%)": _pct(calm.get("breach_rate")),
                "Stress (%)": _pct(stress.get("breach_rate")),
                "Stress N": stress.get("count"),
            }
        )
    return pd.DataFrame(rows)


def uncertainty_table(summary: Dict[str, Any]) -> pd.DataFrame:
    """Safe-output performance per uncertainty state."""
    rows = []
    for state in ("LOW", "ELEVATED"):
        m = _metric(summary, f"uncertainty:{state}", "safe")
        rows.append(
            {
                "State": state.lower(),
                "N": m.get("count", 0),
                "Breach (%)": _pct(m.get("breach_rate")),
                "Pinball": m.get("pinball"),
            }
        )
    return pd.DataFrame(rows)


def cross_asset_table(summary: Dict[str, Any]) -> pd.DataFrame:
    """Safe against GJR-GARCH breach rates per symbol."""
    rows = []
    for slice_name in sorted(summary.get("metrics", {})):
        if not slice_name.startswith("symbol:"):
            continue
        rows.append(
            {
                "Symbol": slice_name.split(":", 1)[1],
                "Safe (%)": _pct(_metric(summary, slice_name, "safe").get("breach_rate")),
                "GJR-GARCH (%)": _pct(_metric(summary, slice_name, "gjr").get("breach_rate")),
            }
        )
    return pd.DataFrame(rows)


def fallback_table(summary: Dict[str, Any]) -> pd.DataFrame:
    """Safe breach rates of the fallback variants, clean and corrupted."""
    rows = summary.get("ablations", {}).get("fallback", [])
    return pd.DataFrame(
        [
            {
                "Variant": VARIANT_LABELS.get(r["variant"], r["variant"]),
                "Clean overall (%)": _pct(r.get("clean_overall")),
                "Clean stress (%)": _pct(r.get("clean_stress")),
                "Corrupted overall (%)": _pct(r.get("corrupted_overall")),
                "Corrupted stress (%)": _pct(r.get("corrupted_stress")),
            }
            for r in rows
        ]
    )


def quality_table(summary: Dict[str, Any]) -> pd.DataFrame:
    """Quality-layer experiments under corrupted inputs."""
    rows = summary.get("ablations", {}).get("quality", [])
    return pd.DataFrame(
        [
            {
                "Experiment": EXPERIMENT_LABELS.get(r["experiment"], r["experiment"]),
                "Overall (%)": _pct(r.get("overall")),
                "Stress (%)": _pct(r.get("stress")),
                "Pinball": r.get("pinball"),
                "Alerts (G/O/R)": f"{r.get('alerts_green')}/{r.get('alerts_orange')}/{r.get('alerts_red')}",
            }
            for r in rows
        ]
    )


def alert_lines(summary: Dict[str, Any]) -> List[str]:
    alerts = summary.get("alerts", {})
    if not alerts:
        return []
    counts = alerts.get("alerts", {})
    lines = [
        f"Records: {alerts.get('records')} of {alerts.get('expected_records')} "
        f"(availability {_fmt_pct(alerts.get('availability'))})",
        f"Alerts: {counts.get('GREEN', 0)} green, {counts.get('ORANGE', 0)} orange, {counts.get('RED', 0)} red",
    ]
    if alerts.get("macro_coverage") is not None:
        lines.append(f"Yield curve available on {_fmt_pct(alerts['macro_coverage'])} of prediction days")
    faults = summary.get("faults")
    if faults:
        lines.append(
            f"Corrupted rows: {faults.get('corrupted_rows')} of {faults.get('eligible_rows')} eligible "
            f"({faults.get('modes')})"
        )
    return lines


def _fmt_pct(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{100.0 * value:.2f}%"


def _render(title: str, frame: pd.DataFrame) -> str:
    if frame.empty:
        return ""
    body = frame.to_string(index=False, float_format=lambda v: f"{v:.6g}", na_rep="n/a")
    return f"{title}\n{'-' * len(title)}\n{body}\n"


def render_report(summary: Dict[str, Any]) -> str:
    """Every table that the summary has data for, as one text block."""
    sections = [
        "\n".join(alert_lines(summary)) + "\n" if alert_lines(summary) else "",
        _render("Breach rates by method", method_table(summary)),
        _render("Stress comparison", stress_table(summary)),
        _render("Safe output by uncertainty state", uncertainty_table(summary)),
        _render("Cross-asset breach rates", cross_asset_table(summary)),
        _render("Fallback components", fallback_table(summary)),
        _render("Quality-layer ablation", quality_table(summary)),
    ]
    return "\n".join(s for s in sections if s)
