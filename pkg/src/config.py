"""
Configuration management using Pydantic Settings.

Two layers:
- ``Settings``: process-level settings from environment variables and .env file
  (logging, run store, threads).
- ``RunConfig``: the monitoring run itself (windows, weights, thresholds, model
  hyperparameters), loaded from a YAML file. Every default is fixed ex ante.
"""

from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.exceptions import ConfigError


class Settings(BaseSettings):
    """Application settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    # Run store
    database_url: str = Field(
        default="sqlite:///./etf_monitor.db",
        description="Database connection URL for the run store"
    )
    record_runs: bool = Field(
        default=True,
        description="Register every backtest/corrupt/ablate run in the run store"
    )

    # Logging Configuration
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        description="Logging level"
    )
    log_format: Literal["text", "json"] = Field(
        default="text",
        description="Log output format"
    )
    log_file: str = Field(
        default="logs/etf_monitor.log",
        description="Path to log file"
    )
    log_to_console: bool = Field(
        default=True,
        description="Enable console logging"
    )
    log_to_file: bool = Field(
        default=True,
        description="Enable file logging"
    )

    # Application Settings
    debug: bool = Field(
        default=False,
        description="Enable debug mode (echo SQL)"
    )

    # Performance Settings
    default_threads: int = Field(
        default=1,
        ge=1,
        le=256,
        description="Worker threads when --threads is not given"
    )

    @field_validator("database_url")
    @classmethod
    def validate_database_url(cls, v: str) -> str:
        """Validate database URL format."""
        if not v:
            raise ValueError("Database URL cannot be empty")
        return v


# Global settings instance
settings = Settings()


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DataConfig(_Section):
    """Input locations."""

    panel_path: Optional[str] = Field(default=None, description="Panel CSV path")
    macro_path: Optional[str] = Field(default=None, description="Macro CSV path")
    symbols: Optional[List[str]] = Field(default=None, description="Restrict to these symbols")
    use_synthetic: bool = Field(default=False, description="Use the synthetic generator")


class SyntheticConfig(_Section):
    """Synthetic GJR-GARCH-t panel generator."""

    n_symbols: int = Field(default=6, ge=1)
    n_days: int = Field(default=2000, ge=2)
    seed: int = 7
    start_date: str = "2015-01-02"
    omega: float = Field(default=2e-6, gt=0)
    alpha_arch: float = Field(default=0.04, ge=0)
    gamma_lev: float = Field(default=0.10, ge=0)
    beta_garch: float = Field(default=0.86, ge=0)
    nu: float = Field(default=6.0, gt=2)
    vol_dispersion: float = Field(default=0.35, ge=0, description="Cross-symbol spread of vol level")
    common_factor_weight: float = Field(default=0.5, ge=0, le=1)
    regime_switch_prob: float = Field(default=0.01, ge=0, le=1)
    regime_vol_scale: float = Field(default=1.8, ge=1)
    macro_gap_rate: float = Field(default=0.10, ge=0, le=1)
    trading_days_per_year: int = Field(default=252, ge=1)


class FeatureConfig(_Section):
    """Feature construction."""

    ewma_lambda: float = Field(default=0.94, gt=0, lt=1)
    roll_vol_window: int = Field(default=20, ge=2)
    z_return_window: int = Field(default=60, ge=2)
    z_volume_window: int = Field(default=20, ge=2)
    scale_floor: float = Field(default=1e-6, gt=0)
    model_features: List[str] = Field(
        default=[
            "return_t",
            "ewma_vol",
            "parkinson_vol",
            "garman_klass_vol",
            "roll_vol_20",
            "drawdown",
            "z_return_60",
            "z_volume_20",
            "xs_mean_return",
            "xs_mean_vol",
            "vix",
            "yield_slope",
        ],
        description="Numeric columns of X_t (symbol one-hots and score_q are appended)",
    )
    include_quality_feature: bool = Field(default=True, description="Append Q_t to X_t")
    include_symbol_onehot: bool = True


class QualityConfig(_Section):
    """Quality score weights and thresholds."""

    w_miss: float = Field(default=0.30, ge=0)
    w_ohlc: float = Field(default=0.35, ge=0)
    w_jump: float = Field(default=0.15, ge=0)
    w_vol: float = Field(default=0.10, ge=0)
    w_stale: float = Field(default=0.10, ge=0)
    jump_threshold: float = Field(default=0.15, gt=0)
    logistic_center: float = 3.0
    logistic_slope: float = Field(default=1.0, gt=0)
    stale_rel_tol: float = Field(default=1e-12, ge=0)
    green_max: float = Field(default=0.25, ge=0, le=1)
    yellow_max: float = Field(default=0.60, ge=0, le=1)

    @model_validator(mode="after")
    def _check(self) -> "QualityConfig":
        total = self.w_miss + self.w_ohlc + self.w_jump + self.w_vol + self.w_stale
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"quality weights must sum to 1, got {total}")
        if self.green_max > self.yellow_max:
            raise ValueError("green_max must not exceed yellow_max")
        return self


class ModelConfig(_Section):
    """Quantile gradient-boosting ensemble."""

    alpha: float = Field(default=0.05, gt=0, lt=1)
    n_members: int = Field(default=5, ge=1)
    n_estimators: int = Field(default=200, ge=1)
    max_depth: int = Field(default=3, ge=1)
    learning_rate: float = Field(default=0.05, gt=0)
    min_samples_leaf: int = Field(default=20, ge=1)
    min_train_rows: int = Field(default=500, ge=1)


class CalibrationConfig(_Section):
    """Residual-based calibration."""

    window: int = Field(default=63, ge=1)
    mode: Literal["in_sample", "previous_ensemble"] = "in_sample"


class UncertaintyConfig(_Section):
    """Uncertainty components, aggregation and states."""

    w_model: float = Field(default=0.40, ge=0)
    w_ood: float = Field(default=0.35, ge=0)
    w_drift: float = Field(default=0.25, ge=0)
    dispersion_divisor: float = Field(default=3.0, gt=0)
    ood_excess_divisor: float = Field(default=1.5, gt=0)
    ood_ref_quantile: float = Field(default=0.95, gt=0, lt=1)
    pca_variance: float = Field(default=0.95, gt=0, le=1)
    pca_max_components: int = Field(default=10, ge=1)
    drift_window: int = Field(default=60, ge=1)
    drift_min_obs: int = Field(default=30, ge=0)
    state_quantile: float = Field(default=0.90, gt=0, lt=1)
    state_history: int = Field(default=252, ge=1)
    state_min_history: int = Field(default=20, ge=0)
    label_low_max: float = Field(default=0.33, ge=0, le=1)
    label_medium_max: float = Field(default=0.66, ge=0, le=1)

    @model_validator(mode="after")
    def _check(self) -> "UncertaintyConfig":
        total = self.w_model + self.w_ood + self.w_drift
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"uncertainty weights must sum to 1, got {total}")
        if self.label_low_max > self.label_medium_max:
            raise ValueError("label_low_max must not exceed label_medium_max")
        return self


class SafeOutputConfig(_Section):
    """Conservative adjustment and anchor."""

    uncertainty_coef: float = Field(default=0.75, ge=0)
    quality_coef: float = Field(default=0.50, ge=0)
    anchor_window: int = Field(default=63, ge=1)


class AlertConfig(_Section):
    """Alert escalation triggers."""

    drift_orange: float = 0.5
    drift_red: float = 1.0
    ratio_orange: float = 0.35
    ratio_red: float = 0.75

    @model_validator(mode="after")
    def _check(self) -> "AlertConfig":
        if self.drift_orange > self.drift_red or self.ratio_orange > self.ratio_red:
            raise ValueError("orange triggers must not exceed red triggers")
        return self


class BaselineConfig(_Section):
    """External benchmark models."""

    hist_window: int = Field(default=252, ge=1)
    ewma_multiplier: float = Field(default=-1.64485, description="Gaussian 5% lower-tail threshold")
    garch_min_obs: int = Field(default=250, ge=10)
    garch_maxiter: int = Field(default=4000, ge=100)


class WindowConfig(_Section):
    """Walk-forward protocol."""

    train_len: int = Field(default=756, ge=2)
    step: int = Field(default=63, ge=1)


class FaultConfig(_Section):
    """Service-time fault injection."""

    probability: float = Field(default=0.15, ge=0, le=1)
    modes: List[Literal["missing", "stale", "ohlc"]] = ["missing", "stale", "ohlc"]
    seed: int = 11
    min_missing_fields: int = Field(default=2, ge=1, le=6)
    max_missing_fields: int = Field(default=4, ge=1, le=6)
    ohlc_collapse_factor: float = Field(default=0.99, gt=0, lt=1)

    @model_validator(mode="after")
    def _check(self) -> "FaultConfig":
        if self.min_missing_fields > self.max_missing_fields:
            raise ValueError("min_missing_fields must not exceed max_missing_fields")
        return self


class RunSection(_Section):
    """Execution and evaluation settings."""

    seed: int = 42
    threads: int = Field(default_factory=lambda: settings.default_threads, ge=1)
    output_dir: str = "outputs"
    stress_quantile: float = Field(default=0.80, gt=0, lt=1)
    rolling_window: int = Field(default=60, ge=1)
    save_models: bool = False


class RunConfig(_Section):
    """Complete configuration of one monitoring run."""

    data: DataConfig = DataConfig()
    synthetic: SyntheticConfig = SyntheticConfig()
    features: FeatureConfig = FeatureConfig()
    quality: QualityConfig = QualityConfig()
    model: ModelConfig = ModelConfig()
    calibration: CalibrationConfig = CalibrationConfig()
    uncertainty: UncertaintyConfig = UncertaintyConfig()
    safe_output: SafeOutputConfig = SafeOutputConfig()
    alerts: AlertConfig = AlertConfig()
    baselines: BaselineConfig = BaselineConfig()
    windows: WindowConfig = WindowConfig()
    faults: FaultConfig = FaultConfig()
    run: RunSection = RunSection()

    @property
    def alpha(self) -> float:
        """Target tail level shared by every layer."""
        return self.model.alpha

    @classmethod
    def from_yaml(cls, path: str) -> "RunConfig":
        """
        Load a run configuration from a YAML file.

        Args:
            path: Path to the YAML file (sections as in monitor.example.yaml)

        Returns:
            Validated RunConfig

        Raises:
            ConfigError: If the file is missing, unparseable or invalid
        """
        yaml_path = Path(path)
        if not yaml_path.exists():
            raise ConfigError(f"Config file not found: {path}")

        try:
            with open(yaml_path, "r", encoding="utf-8") as f:
                raw = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"YAML parsing error in {path}: {e}") from e

        return cls.from_dict(raw)

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "RunConfig":
        """Validate a nested dict into a RunConfig."""
        if not isinstance(raw, dict):
            raise ConfigError("Config root must be a mapping of sections")
        try:
            return cls.model_validate(raw)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration: {e}") from e

    def with_overrides(self, **sections: Dict[str, Any]) -> "RunConfig":
        """
        Return a copy with per-section field overrides.

        Example: ``config.with_overrides(run={"seed": 3}, data={"use_synthetic": True})``.
        None values are ignored so CLI flags can be passed straight through.
        """
        merged = self.model_dump()
        for section, fields in sections.items():
            if section not in merged:
                raise ConfigError(f"Unknown config section: {section}")
            merged[section].update({k: v for k, v in fields.items() if v is not None})
        return RunConfig.from_dict(merged)

    def echo(self) -> Dict[str, Any]:
        """Resolved configuration as a JSON-safe dict (audit trail)."""
        return self.model_dump(mode="json")
