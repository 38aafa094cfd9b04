"""
Out-of-distribution distance in a PCA space of the training features.
"""

from dataclasses import dataclass
from typing import Mapping, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from sklearn.decomposition import PCA

from src.config import UncertaintyConfig
from src.risk.quantiles import empirical_quantile
from src.utils.logger import get_logger

logger = get_logger(__name__)

# Standard deviations (and PCA variances) at or below this count as zero.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class OodModel:
    """Standardization, retained PCA basis and the reference distance."""

    columns: Tuple[str, ...]
    means: np.ndarray
    sds: np.ndarray
    center: np.ndarray
    components: np.ndarray
    variances: np.ndarray
    d_ref: float
    degenerate: bool = False

    @property
    def n_components(self) -> int:
        return int(self.components.shape[0])


def _degenerate(columns: Sequence[str]) -> OodModel:
    empty = np.zeros(0)
    return OodModel(
        columns=tuple(columns),
        means=empty,
        sds=empty,
        center=empty,
        components=np.zeros((0, 0)),
        variances=empty,
        d_ref=1.0,
        degenerate=True,
    )


def fit_ood(rows: pd.DataFrame, config: UncertaintyConfig = UncertaintyConfig()) -> OodModel:
    """
    Fit the OOD reference on imputed training rows.

    Flat features are dropped. The smallest number of components reaching
    ``pca_variance`` of explained variance is kept, capped at
    ``pca_max_components`` and the feature count. Constant input yields a
    degenerate model whose distances are all 0 and whose d_ref is 1.
    """
    X = rows.to_numpy(dtype=float)
    if X.shape[0] < 2:
        logger.warning("OOD fit needs at least 2 rows; using a degenerate model")
        return _degenerate(rows.columns)

    means = X.mean(axis=0)
    sds = X.std(axis=0, ddof=1)
    keep = sds > ZERO_TOL
    if not keep.any():
        logger.warning("All OOD features are constant; using a degenerate model")
        return _degenerate(rows.columns)

    columns = tuple(c for c, k in zip(rows.columns, keep) if k)
    Z = (X[:, keep] - means[keep]) / sds[keep]

    pca = PCA(svd_solver="full").fit(Z)
    cumulative = np.cumsum(pca.explained_variance_ratio_)
    k = int(np.searchsorted(cumulative, config.pca_variance - ZERO_TOL) + 1)
    k = min(k, config.pca_max_components, Z.shape[1], len(pca.explained_variance_))

    variances = pca.explained_variance_[:k]
    components = pca.components_[:k]
    positive = variances > ZERO_TOL
    variances, components = variances[positive], components[positive]
    if variances.size == 0:
        logger.warning("OOD PCA has no positive-variance component; using a degenerate model")
        return _degenerate(rows.columns)

    model = OodModel(
        columns=columns,
        means=means[keep],
        sds=sds[keep],
        center=pca.mean_,
        components=components,
        variances=variances,
        d_ref=1.0,
    )
    distances = ood_distances(model, rows)
    d_ref = empirical_quantile(distances, config.ood_ref_quantile)
    if d_ref <= ZERO_TOL:
        logger.warning("OOD reference distance is 0; using a degenerate model")
        return _degenerate(rows.columns)

    logger.debug(f"OOD model: {model.n_components} components over {len(columns)} features, d_ref={d_ref:.4f}")
    return OodModel(
        columns=columns,
        means=model.means,
        sds=model.sds,
        center=model.center,
        components=components,
        variances=variances,
        d_ref=d_ref,
    )


def ood_distances(model: OodModel, rows: pd.DataFrame) -> np.ndarray:
    """Mahalanobis distance sqrt(sum score_j^2 / lambda_j) for every row."""
    if model.degenerate:
        return np.zeros(len(rows))
    Z = (rows[list(model.columns)].to_numpy(dtype=float) - model.means) / model.sds
    scores = (Z - model.center) @ model.components.T
    return np.sqrt(np.sum(scores**2 / model.variances, axis=1))


def score_from_distance(distance: Union[float, np.ndarray], d_ref: float, excess_divisor: float = 1.5):
    """clip((d / d_ref - 1) / excess_divisor, 0, 1)."""
    return np.clip((np.asarray(distance, dtype=float) / d_ref - 1.0) / excess_divisor, 0.0, 1.0)


def ood_scores(
    model: OodModel, rows: pd.DataFrame, config: UncertaintyConfig = UncertaintyConfig()
) -> np.ndarray:
    if model.degenerate:
        return np.zeros(len(rows))
    return score_from_distance(ood_distances(model, rows), model.d_ref, config.ood_excess_divisor)


def ood_score(
    model: OodModel, x: Mapping[str, float], config: UncertaintyConfig = UncertaintyConfig()
) -> float:
    """u_ood of a single imputed feature row."""
    row = pd.DataFrame([{c: x[c] for c in model.columns}]) if not model.degenerate else pd.DataFrame([{}])
    return float(ood_scores(model, row, config)[0])
