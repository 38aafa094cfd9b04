"""Services: safe output and the worker pool."""

from src.services.pool import WorkerPool
from src.services.safe_output import (
    SafeOutputPolicy,
    adjustment,
    alert_level,
    decide,
    fallback_ratio,
    safe_var,
)

__all__ = [
    "WorkerPool",
    "SafeOutputPolicy",
    "adjustment",
    "alert_level",
    "decide",
    "fallback_ratio",
    "safe_var",
]
