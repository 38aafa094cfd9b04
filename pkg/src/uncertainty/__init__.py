"""Uncertainty layer: ensemble dispersion, OOD distance and calibration drift."""

from src.uncertainty.drift import DriftTracker
from src.uncertainty.ood import OodModel, fit_ood, ood_distances, ood_score, ood_scores
from src.uncertainty.scoring import (
    assess_uncertainty,
    combine,
    drift_score,
    model_dispersion,
    uncertainty_label,
    uncertainty_state,
)

__all__ = [
    "DriftTracker",
    "OodModel",
    "fit_ood",
    "ood_distances",
    "ood_score",
    "ood_scores",
    "assess_uncertainty",
    "combine",
    "drift_score",
    "model_dispersion",
    "uncertainty_label",
    "uncertainty_state",
]
