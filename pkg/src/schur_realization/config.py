"""
Configuration

Tolerances, sampling settings and job description. Values come from built-in
defaults, then an optional YAML file, then command-line flags.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .exceptions import ConfigError
from .numerics import Tolerances

logger = logging.getLogger(__name__)

OUTPUT_FORMATS = ("json", "text")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")

_TOLERANCE_KEYS = ("rank_tol", "psd_tol", "eq_tol")
_SAMPLING_KEYS = ("sample_count", "sample_radius", "rng_seed", "threads", "degree_cap")
_OUTPUT_KEYS = ("format", "log_level")


@dataclass(frozen=True)
class SamplingConfig:
    """
    Settings for seeded point sampling.

    Attributes:
        sample_count: Number of points drawn per sample
        sample_radius: Points are drawn with norm at most this radius
        rng_seed: Seed of the single generator behind all sampling
        threads: Upper bound on worker threads for point sweeps
        degree_cap: Largest Taylor degree explored; None means 2*d*dimX
    """

    sample_count: int = 50
    sample_radius: float = 0.9
    rng_seed: int = 42
    threads: int = 1
    degree_cap: int | None = None

    def __post_init__(self) -> None:
        if int(self.sample_count) < 1:
            raise ConfigError(f"sample_count must be at least 1, got {self.sample_count}")
        if not 0.0 < float(self.sample_radius) < 1.0:
            raise ConfigError(f"sample_radius must lie in (0, 1), got {self.sample_radius}")
        if int(self.threads) < 1:
            raise ConfigError(f"threads must be at least 1, got {self.threads}")
        if self.degree_cap is not None and int(self.degree_cap) < 1:
            raise ConfigError(f"degree_cap must be at least 1, got {self.degree_cap}")

    def generator(self, stream: int = 0) -> np.random.Generator:
        """Return a fresh generator seeded from rng_seed and a stream index."""
        return np.random.default_rng([self.rng_seed, stream])

    def cap_for(self, d: int, dim_x: int) -> int:
        """Degree cap for a tuple of d operators on a dim_x-dimensional state space."""
        if self.degree_cap is not None:
            return int(self.degree_cap)
        return max(2 * d * dim_x, 2)

    def to_dict(self) -> dict[str, Any]:
        """Convert to dictionary."""
        return {
            "sample_count": self.sample_count,
            "sample_radius": self.sample_radius,
            "rng_seed": self.rng_seed,
            "threads": self.threads,
            "degree_cap": self.degree_cap,
        }


@dataclass
class JobConfig:
    """A fully resolved CLI job."""

    command: str
    inputs: dict[str, Path] = field(default_factory=dict)
    options: dict[str, Any] = field(default_factory=dict)
    tolerances: Tolerances = field(default_factory=Tolerances)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    output: Path | None = None
    output_format: str = "json"
    log_level: str = "WARNING"

    def __post_init__(self) -> None:
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output format must be one of {OUTPUT_FORMATS}, got {self.output_format!r}")
        if self.log_level.upper() not in LOG_LEVELS:
            raise ConfigError(f"log level must be one of {LOG_LEVELS}, got {self.log_level!r}")
        self.log_level = self.log_level.upper()


def load_config_file(path: str | Path) -> dict[str, Any]:
    """
    Load a YAML configuration file.

    Args:
        path: Path to the YAML file

    Returns:
        The parsed mapping (empty when the file is empty)

    Raises:
        ConfigError: The file is missing, malformed or carries unknown keys
    """
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Config file not found: {config_path}")

    try:
        with open(config_path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"YAML error in {config_path}: {e}") from e

    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path}: top level must be a mapping")

    allowed = {
        "tolerances": _TOLERANCE_KEYS,
        "sampling": _SAMPLING_KEYS,
        "output": _OUTPUT_KEYS,
    }
    for section, values in data.items():
        if section not in allowed:
            raise ConfigError(f"{config_path}: unknown section '{section}'")
        if values is None:
            continue
        if not isinstance(values, dict):
            raise ConfigError(f"{config_path}: section '{section}' must be a mapping")
        unknown = sorted(set(values) - set(allowed[section]))
        if unknown:
            raise ConfigError(f"{config_path}: unknown keys in '{section}': {', '.join(unknown)}")

    logger.debug(f"Loaded config from {config_path}")
    return data


def _number(value: Any, kind: type, key: str) -> Any:
    try:
        return kind(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{key}: expected {kind.__name__}, got {value!r}") from e


def resolve_settings(
    file_data: dict[str, Any] | None = None,
    overrides: dict[str, Any] | None = None,
) -> tuple[Tolerances, SamplingConfig, dict[str, str]]:
    """
    Merge defaults, file values and overrides.

    Args:
        file_data: Mapping returned by load_config_file
        overrides: Flat mapping of setting name to value; None values are ignored

    Returns:
        Tuple of (tolerances, sampling config, output settings)
    """
    file_data = file_data or {}
    flat: dict[str, Any] = {}
    for section in ("tolerances", "sampling", "output"):
        flat.update(file_data.get(section) or {})
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})

    tolerances = Tolerances(
        **{k: _number(flat[k], float, k) for k in _TOLERANCE_KEYS if k in flat}
    )

    sampling_values: dict[str, Any] = {}
    for key in _SAMPLING_KEYS:
        if key not in flat:
            continue
        if key == "degree_cap" and flat[key] is None:
            continue
        kind = float if key == "sample_radius" else int
        sampling_values[key] = _number(flat[key], kind, key)
    sampling = SamplingConfig(**sampling_values)

    output = {
        "format": str(flat.get("format", "json")),
        "log_level": str(flat.get("log_level", "WARNING")),
    }
    return tolerances, sampling, output
