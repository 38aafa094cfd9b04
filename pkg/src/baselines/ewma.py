"""
EWMA-normal VaR.
"""

import math
from typing import Optional

# Gaussian 5% lower-tail threshold
GAUSSIAN_5PCT = -1.64485


def ewma_var(ewma_vol: Optional[float], multiplier: float = GAUSSIAN_5PCT) -> Optional[float]:
    """multiplier * sigma_ewma; None when the volatility is missing."""
    if ewma_vol is None or math.isnan(ewma_vol):
        return None
    if ewma_vol < 0:
        raise ValueError("ewma_vol must be non-negative")
    return multiplier * ewma_vol
