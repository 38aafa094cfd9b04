"""
Fitted-ensemble artifacts.

Artifacts are joblib-serialized dicts tagged with a format version so a
reader can refuse files it does not understand.
"""

from pathlib import Path
from typing import Optional, Sequence

import joblib

from src.exceptions import ArtifactError
from src.risk.ensemble import QuantileEnsemble
from src.utils.logger import get_logger

logger = get_logger(__name__)

FORMAT_VERSION = "etf-monitor/ensemble/1"


def save_ensemble(ensemble: QuantileEnsemble, path: str) -> Path:
    """Write an ensemble artifact and return its path."""
    artifact = {
        "format_version": FORMAT_VERSION,
        "feature_list": list(ensemble.feature_list),
        "medians": dict(ensemble.medians),
        "alpha": ensemble.alpha,
        "seed": ensemble.seed,
        "member_seeds": list(ensemble.member_seeds),
        "window": list(ensemble.window),
        "n_rows": ensemble.n_rows,
        "members": list(ensemble.members),
    }
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    joblib.dump(artifact, out)
    logger.info(f"Saved ensemble artifact {out}")
    return out


def load_ensemble(path: str, expected_features: Optional[Sequence[str]] = None) -> QuantileEnsemble:
    """
    Read an ensemble artifact.

    Raises:
        ArtifactError: Unreadable file, unknown version or feature-list mismatch
    """
    try:
        artifact = joblib.load(path)
    except (OSError, EOFError, ValueError, KeyError) as e:
        raise ArtifactError(f"Cannot read ensemble artifact {path}: {e}") from e

    if not isinstance(artifact, dict) or artifact.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(f"Unsupported artifact format in {path}")

    features = tuple(artifact["feature_list"])
    if expected_features is not None and tuple(expected_features) != features:
        raise ArtifactError(f"Artifact {path} feature list does not match the requested features")

    return QuantileEnsemble(
        members=tuple(artifact["members"]),
        feature_list=features,
        medians=dict(artifact["medians"]),
        alpha=float(artifact["alpha"]),
        seed=int(artifact["seed"]),
        window=tuple(artifact["window"]),  # type: ignore[arg-type]
        n_rows=int(artifact["n_rows"]),
        member_seeds=tuple(artifact["member_seeds"]),
    )
