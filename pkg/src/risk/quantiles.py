"""
Quantile and pinball-loss primitives shared by every layer.
"""

from typing import Iterable, Union

import numpy as np

# Linear interpolation between order statistics at rank 1 + alpha * (n - 1).
# Alternatives ("lower", "higher", "nearest") are a one-word swap.
QUANTILE_METHOD = "linear"

ArrayLike = Union[float, np.ndarray]


def empirical_quantile(values: Iterable[float], alpha: float) -> float:
    """
    Empirical alpha-quantile of a non-empty sample.

    Raises:
        ValueError: If the sample is empty or alpha is outside [0, 1]
    """
    sample = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if sample.size == 0:
        raise ValueError("empirical_quantile of an empty sample")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return float(np.quantile(sample, alpha, method=QUANTILE_METHOD))


def pinball_loss(y: ArrayLike, q: ArrayLike, alpha: float) -> ArrayLike:
    """alpha * (y - q) if y >= q else (1 - alpha) * (q - y); elementwise on arrays."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    diff = np.asarray(y, dtype=float) - np.asarray(q, dtype=float)
    loss = np.where(diff >= 0, alpha * diff, (alpha - 1.0) * diff)
    return float(loss) if loss.ndim == 0 else loss
