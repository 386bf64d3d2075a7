"""Configuration management for specsense."""

import os
import json
from pathlib import Path
from typing import List, Optional, Dict, Any

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from specsense.detectors.statistics import DetectorKind
from specsense.utils.logging import get_logger

logger = get_logger(__name__)

ENV_SEED = "SPECSENSE_SEED"
ENV_THREADS = "SPECSENSE_THREADS"
ENV_CHUNK_SIZE = "SPECSENSE_CHUNK_SIZE"
ENV_LOG_LEVEL = "SPECSENSE_LOG_LEVEL"

UINT64_MAX = 2 ** 64 - 1
SPECTRUM_RTOL = 1e-9
VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]


class ConfigError(Exception):
    """Exception raised for invalid configuration files or values."""
    pass


def db_to_linear(db: float) -> float:
    """Convert a power ratio from dB to linear scale."""
    return float(10.0 ** (db / 10.0))


def _validate_seed(v: int) -> int:
    if not 0 <= v <= UINT64_MAX:
        raise ValueError(f"Seed must be a 64-bit unsigned integer, got {v}")
    return v


class Scenario(BaseModel):
    """A sensing experiment: array size, primary users and Monte Carlo budget."""

    K: int
    N: int
    P: Optional[int] = None
    snrs_db: List[float] = Field(default_factory=list)
    noise_power: float = 1.0
    sigma_spectrum: Optional[List[float]] = None
    seed: int = 0
    trials: int = 100_000
    channel_seed: Optional[int] = None
    calibration_trials: Optional[int] = None

    @field_validator("K", "N", "trials")
    def validate_positive(cls, v: int) -> int:
        """Validate counts are positive."""
        if v < 1:
            raise ValueError(f"Must be at least 1, got {v}")
        return v

    @field_validator("noise_power")
    def validate_noise_power(cls, v: float) -> float:
        """Validate noise power."""
        if not v > 0:
            raise ValueError(f"Noise power must be positive, got {v}")
        return v

    @field_validator("seed", "channel_seed")
    def validate_seed(cls, v: Optional[int]) -> Optional[int]:
        """Validate seed range."""
        if v is None:
            return v
        return _validate_seed(v)

    @field_validator("calibration_trials")
    def validate_calibration_trials(cls, v: Optional[int]) -> Optional[int]:
        """Validate calibration budget."""
        if v is not None and v < 1:
            raise ValueError(f"Calibration trials must be at least 1, got {v}")
        return v

    @model_validator(mode="after")
    def validate_structure(self) -> "Scenario":
        """Check user count and the covariance spectrum against K and noise power."""
        if self.P is None:
            self.P = len(self.snrs_db)
        elif self.P != len(self.snrs_db):
            raise ValueError(f"P={self.P} does not match {len(self.snrs_db)} SNR entries")

        if self.sigma_spectrum is not None:
            if len(self.sigma_spectrum) != self.K:
                raise ValueError(
                    f"sigma_spectrum has {len(self.sigma_spectrum)} entries, expected K={self.K}"
                )
            floor = self.noise_power * (1.0 - SPECTRUM_RTOL)
            if min(self.sigma_spectrum) < floor:
                raise ValueError(
                    f"sigma_spectrum entries must be at least the noise power {self.noise_power}"
                )
        return self

    @property
    def snrs_linear(self) -> List[float]:
        """Per-user SNRs on a linear scale."""
        return [db_to_linear(snr) for snr in self.snrs_db]

    @property
    def effective_channel_seed(self) -> int:
        """Seed for the persisted channel realization."""
        return self.seed if self.channel_seed is None else self.channel_seed


class SimulationSettings(BaseModel):
    """Run-wide Monte Carlo and logging settings."""

    seed: int = 1
    trials: int = 100_000
    threads: int = 1
    chunk_size: int = 2048
    moment_cap: int = 16
    min_tail_samples: int = 100
    log_level: str = "INFO"
    log_file: Optional[str] = None

    @field_validator("seed")
    def validate_seed(cls, v: int) -> int:
        """Validate seed range."""
        return _validate_seed(v)

    @field_validator("trials", "threads", "chunk_size")
    def validate_positive(cls, v: int) -> int:
        """Validate counts are positive."""
        if v < 1:
            raise ValueError(f"Must be at least 1, got {v}")
        return v

    @field_validator("moment_cap")
    def validate_moment_cap(cls, v: int) -> int:
        """Validate moment order cap."""
        if v < 2:
            raise ValueError(f"Moment cap must be at least 2, got {v}")
        return v

    @field_validator("min_tail_samples")
    def validate_min_tail_samples(cls, v: int) -> int:
        """Validate the calibration tail budget."""
        if v < 100:
            raise ValueError(f"min_tail_samples must be at least 100, got {v}")
        return v

    @field_validator("log_level")
    def validate_log_level(cls, v: str) -> str:
        """Validate log level name."""
        if v.upper() not in VALID_LOG_LEVELS:
            raise ValueError(f"Invalid log level: {v}. Must be one of {VALID_LOG_LEVELS}")
        return v.upper()


class RocConfig(BaseModel):
    """A scenario plus the detectors and false alarm grid of a ROC run."""

    scenario: Scenario
    detectors: List[DetectorKind] = Field(
        default_factory=lambda: [
            DetectorKind.JOHN,
            DetectorKind.SPHERICAL_TEST,
            DetectorKind.SCALED_LARGEST_EIGENVALUE,
        ]
    )
    pfa_grid: List[float] = Field(default_factory=lambda: [0.01, 0.05, 0.1, 0.2, 0.5])

    @field_validator("detectors")
    def validate_detectors(cls, v: List[DetectorKind]) -> List[DetectorKind]:
        """Validate detector list."""
        if not v:
            raise ValueError("At least one detector is required")
        if len(set(v)) != len(v):
            raise ValueError("Detectors must not repeat")
        return v

    @field_validator("pfa_grid")
    def validate_pfa_grid(cls, v: List[float]) -> List[float]:
        """Validate the false alarm grid."""
        return validate_pfa_grid(v)


def validate_pfa_grid(grid: List[float]) -> List[float]:
    """Check a false alarm grid is non-empty, inside (0, 1) and strictly increasing."""
    if not grid:
        raise ValueError("pfa_grid must not be empty")
    for value in grid:
        if not 0.0 < value < 1.0:
            raise ValueError(f"pfa_grid values must lie in (0, 1), got {value}")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("pfa_grid must be strictly increasing")
    return grid


class Config(BaseModel):
    """Main configuration for specsense."""

    simulation: SimulationSettings = Field(default_factory=SimulationSettings)
    roc: Optional[RocConfig] = None

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Config":
        """Create config from dictionary."""
        if "simulation" in data and isinstance(data["simulation"], dict):
            data["simulation"] = SimulationSettings(**data["simulation"])
        if data.get("roc") is not None and isinstance(data["roc"], dict):
            data["roc"] = RocConfig(**data["roc"])
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        """Convert config to dictionary."""
        return self.model_dump(mode="json")


def format_validation_error(error: ValidationError, source: str) -> str:
    """Render pydantic errors as one ``source: field.path: message`` line each."""
    lines = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        lines.append(f"{source}: {location}: {item['msg']}")
    return "\n".join(lines)


def _read_json(path: Path) -> Dict[str, Any]:
    if not path.exists():
        raise ConfigError(f"{path}: file not found")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top-level value must be a JSON object")
    return data


def _env_int(name: str) -> Optional[int]:
    raw = os.environ.get(name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring invalid environment value", extra={"variable": name, "value": raw})
        return None


def apply_env_overrides(settings: SimulationSettings) -> SimulationSettings:
    """Apply SPECSENSE_* environment variables on top of file settings.

    Environment variables:
        - SPECSENSE_SEED: Default seed
        - SPECSENSE_THREADS: Worker threads for Monte Carlo chunks
        - SPECSENSE_CHUNK_SIZE: Trials per chunk
        - SPECSENSE_LOG_LEVEL: Log level name
    """
    updates: Dict[str, Any] = {}
    for name, field in ((ENV_SEED, "seed"), (ENV_THREADS, "threads"), (ENV_CHUNK_SIZE, "chunk_size")):
        value = _env_int(name)
        if value is not None:
            updates[field] = value
    if ENV_LOG_LEVEL in os.environ:
        updates["log_level"] = os.environ[ENV_LOG_LEVEL]
    if not updates:
        return settings

    merged = {**settings.model_dump(), **updates}
    try:
        return SimulationSettings(**merged)
    except ValidationError as e:
        logger.warning("Ignoring invalid environment overrides", extra={"error": str(e)})
        return settings


def load_config(config_path: Optional[str] = None) -> Config:
    """Load configuration from file and environment variables.

    Args:
        config_path: Path to a JSON configuration file. Without one, defaults
                    are used.

    Returns:
        Config object with loaded configuration.

    Raises:
        ConfigError: If the file is missing, malformed or fails validation
    """
    config_dict: Dict[str, Any] = {}
    source = "<defaults>"
    if config_path is not None:
        source = config_path
        config_dict = _read_json(Path(config_path))

    try:
        config = Config.from_dict(config_dict)
    except ValidationError as e:
        raise ConfigError(format_validation_error(e, source)) from e

    config.simulation = apply_env_overrides(config.simulation)
    return config


def load_roc_config(config_path: str) -> RocConfig:
    """Load a ROC scenario file.

    Accepts either a bare ROC document (``scenario``, ``detectors``,
    ``pfa_grid``) or a full config whose ``roc`` key holds one.

    Raises:
        ConfigError: With line/column or field-path diagnostics
    """
    data = _read_json(Path(config_path))
    if "roc" in data and "scenario" not in data:
        data = data["roc"] or {}
    try:
        return RocConfig(**data)
    except ValidationError as e:
        raise ConfigError(format_validation_error(e, config_path)) from e
