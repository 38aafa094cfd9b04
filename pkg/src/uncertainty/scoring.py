"""
Uncertainty components, aggregate score, diagnostic state and label.
"""

from typing import Optional, Sequence

import numpy as np

from src.config import UncertaintyConfig
from src.models import UncertaintyLabel, UncertaintyReport, UncertaintyState
from src.risk.quantiles import empirical_quantile
from src.uncertainty.drift import DriftTracker

DEFAULT_UNCERTAINTY = UncertaintyConfig()


def model_dispersion(
    member_preds: Sequence[float], scale_s: float, config: UncertaintyConfig = DEFAULT_UNCERTAINTY
) -> float:
    """min(1, sd(members) / (3 s_t)) with the n-1 sample sd."""
    if scale_s <= 0:
        raise ValueError("scale_s must be positive")
    preds = np.asarray(member_preds, dtype=float)
    if preds.size < 2:
        return 0.0
    sd = float(np.std(preds, ddof=1))
    return min(1.0, sd / (config.dispersion_divisor * scale_s))


def drift_score(
    tracker: DriftTracker,
    symbol: str,
    alpha: float,
    config: UncertaintyConfig = DEFAULT_UNCERTAINTY,
) -> float:
    """min(1, max(p - alpha, 0) / (2 alpha)); 0 below the minimum observation count."""
    if tracker.observations(symbol) < config.drift_min_obs:
        return 0.0
    rate = tracker.breach_rate(symbol)
    if rate is None:
        return 0.0
    return min(1.0, max(rate - alpha, 0.0) / (2.0 * alpha))


def combine(
    u_model: float, u_ood: float, u_drift: float, config: UncertaintyConfig = DEFAULT_UNCERTAINTY
) -> float:
    return config.w_model * u_model + config.w_ood * u_ood + config.w_drift * u_drift


def uncertainty_state(
    tracker: DriftTracker,
    symbol: str,
    score_u: float,
    config: UncertaintyConfig = DEFAULT_UNCERTAINTY,
) -> UncertaintyState:
    """ELEVATED iff U_t exceeds the rolling quantile of the symbol's strictly prior scores."""
    history = tracker.u_history(symbol)
    if len(history) < config.state_min_history:
        return UncertaintyState.LOW
    threshold = empirical_quantile(np.asarray(history), config.state_quantile)
    return UncertaintyState.LOW if score_u <= threshold else UncertaintyState.ELEVATED


def uncertainty_label(score_u: float, config: UncertaintyConfig = DEFAULT_UNCERTAINTY) -> UncertaintyLabel:
    if score_u <= config.label_low_max:
        return UncertaintyLabel.LOW
    if score_u <= config.label_medium_max:
        return UncertaintyLabel.MEDIUM
    return UncertaintyLabel.HIGH


def assess_uncertainty(
    tracker: DriftTracker,
    symbol: str,
    member_preds: Sequence[float],
    scale_s: float,
    u_ood: float,
    alpha: float,
    config: UncertaintyConfig = DEFAULT_UNCERTAINTY,
    u_drift: Optional[float] = None,
) -> UncertaintyReport:
    """
    Full uncertainty report for one symbol-day.

    The state is judged against the prior history, then U_t is appended to
    it. Callers must resolve the tracker with day t's return first.
    """
    u_model = model_dispersion(member_preds, scale_s, config)
    if u_drift is None:
        u_drift = drift_score(tracker, symbol, alpha, config)
    score_u = combine(u_model, u_ood, u_drift, config)
    state = uncertainty_state(tracker, symbol, score_u, config)
    tracker.push_score(symbol, score_u)
    return UncertaintyReport(
        u_model=u_model,
        u_ood=u_ood,
        u_drift=u_drift,
        score_u=score_u,
        state=state,
        label=uncertainty_label(score_u, config),
    )
