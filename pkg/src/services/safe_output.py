"""
Safe VaR, fallback ratio and alert escalation.

All functions are pure. A policy fixes how much the quality and uncertainty
scores widen the forecast and whether the quality state can raise an alert;
the default policy is the full service and the ablation variants are
alternative policies.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

from src.config import AlertConfig, SafeOutputConfig
from src.models import AlertLevel, QualityState, SafeDecision, UncertaintyLabel

DEFAULT_SAFE = SafeOutputConfig()
DEFAULT_ALERTS = AlertConfig()


@dataclass(frozen=True)
class SafeOutputPolicy:
    """Coefficients of A_t and the alert inputs in use."""

    uncertainty_coef: float = 0.75
    quality_coef: float = 0.50
    quality_in_alert: bool = True
    use_anchor: bool = True

    @classmethod
    def from_config(cls, config: SafeOutputConfig) -> "SafeOutputPolicy":
        return cls(uncertainty_coef=config.uncertainty_coef, quality_coef=config.quality_coef)


def adjustment(
    scale_s: float, score_u: float, score_q: float, policy: SafeOutputPolicy = SafeOutputPolicy()
) -> float:
    """A_t = s_t (c_U U_t + c_Q Q_t)."""
    if scale_s <= 0:
        raise ValueError("scale_s must be positive")
    return scale_s * (policy.uncertainty_coef * score_u + policy.quality_coef * score_q)


def safe_var(q_cal: float, q_hist63: Optional[float], adjustment_a: float) -> Tuple[float, bool]:
    """
    min(q_hist63, q_cal - A_t).

    Returns:
        (q_safe, anchor_missing); without an anchor the model side is used alone
    """
    model_side = q_cal - adjustment_a
    if q_hist63 is None:
        return model_side, True
    return min(q_hist63, model_side), False


def fallback_ratio(q_cal: float, q_safe: float, scale_s: float) -> float:
    """(q_cal - q_safe)_+ / s_t."""
    if scale_s <= 0:
        raise ValueError("scale_s must be positive")
    return max(q_cal - q_safe, 0.0) / scale_s


def alert_level(
    quality_state: Optional[QualityState],
    uncertainty_label: UncertaintyLabel,
    u_drift: float,
    ratio_r: float,
    config: AlertConfig = DEFAULT_ALERTS,
) -> AlertLevel:
    """
    RED if any red trigger fires, else ORANGE if any orange trigger fires.

    ``quality_state`` of None leaves quality out of the escalation.
    """
    if (
        quality_state is QualityState.RED
        or uncertainty_label is UncertaintyLabel.HIGH
        or u_drift >= config.drift_red
        or ratio_r >= config.ratio_red
    ):
        return AlertLevel.RED
    if (
        quality_state is QualityState.YELLOW
        or uncertainty_label is UncertaintyLabel.MEDIUM
        or u_drift >= config.drift_orange
        or ratio_r >= config.ratio_orange
    ):
        return AlertLevel.ORANGE
    return AlertLevel.GREEN


def decide(
    q_cal: float,
    q_hist63: Optional[float],
    scale_s: float,
    score_u: float,
    score_q: float,
    quality_state: QualityState,
    uncertainty_label: UncertaintyLabel,
    u_drift: float,
    policy: SafeOutputPolicy = SafeOutputPolicy(),
    alerts: AlertConfig = DEFAULT_ALERTS,
) -> SafeDecision:
    """Safe decision for one symbol-day under a policy."""
    a = adjustment(scale_s, score_u, score_q, policy)
    if policy.use_anchor:
        q_safe, anchor_missing = safe_var(q_cal, q_hist63, a)
    else:
        q_safe, anchor_missing = q_cal - a, False
    r = fallback_ratio(q_cal, q_safe, scale_s)
    alert = alert_level(
        quality_state if policy.quality_in_alert else None, uncertainty_label, u_drift, r, alerts
    )
    return SafeDecision(
        q_hist63=q_hist63,
        adjustment_a=a,
        q_safe=q_safe,
        ratio_r=r,
        alert=alert,
        anchor_missing=anchor_missing,
    )
