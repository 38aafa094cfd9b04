"""Market data: ingestion, synthetic panels and features."""

from src.data.features import (
    compute_features,
    impute_with_medians,
    model_feature_columns,
    training_medians,
)
from src.data.loader import load_panel, save_panel
from src.data.synthetic import generate_synthetic_panel

__all__ = [
    "compute_features",
    "impute_with_medians",
    "model_feature_columns",
    "training_medians",
    "load_panel",
    "save_panel",
    "generate_synthetic_panel",
]
