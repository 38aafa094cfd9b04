"""
Exception hierarchy.

Each error carries the process exit code the CLI returns for it.
"""


class MonitorError(Exception):
    """Base class for all monitoring errors."""

    exit_code = 3


class ConfigError(MonitorError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class DataError(MonitorError):
    """Input data cannot support the requested operation."""

    exit_code = 2


class IngestError(DataError):
    """Panel or macro file could not be ingested."""


class ScheduleError(DataError):
    """Not enough trading dates for a walk-forward schedule."""


class ModelError(MonitorError):
    """Model fitting, prediction or persistence failure."""

    exit_code = 3


class EnsembleFitError(ModelError):
    """Quantile ensemble could not be fitted."""


class PredictionError(ModelError):
    """Prediction request does not match the fitted model."""


class ArtifactError(ModelError):
    """Persisted model artifact is unreadable or incompatible."""
