"""
Configuration for the decarbonization speed pipeline

Values are layered: config/config.yaml, then .env / process environment,
then CLI flags.
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_PATH = Path("config/config.yaml")
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

STATISTICS = ("mean", "median", "p25", "p75", "std")
FORMATS = ("json", "csv")

# Environment variable -> (section, key)
ENV_OVERRIDES = {
    'DECARB_SEED': ('ensemble', 'seed'),
    'DECARB_REGION': ('ingest', 'region'),
    'DECARB_START_YEAR': ('ingest', 'start_year'),
    'DECARB_U_MAX': (None, 'u_max_override'),
    'LOG_LEVEL': (None, 'log_level'),
}


class IngestConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    region: str = "World"
    start_year: int = Field(2010, ge=2005, le=2050)
    emissions_variable: str = "Emissions|CO2|Fossil Fuels and Industry"
    energy_variable: str = "Primary Energy"
    emissions_units: Tuple[str, ...] = ("Mt CO2/yr", "MtCO2/yr")
    energy_units: Tuple[str, ...] = ("EJ/yr",)
    min_points: int = Field(6, ge=2)


class FitConfig(BaseModel):
    """Settings for the per-scenario speed fit; theta is per `time_unit_years`"""

    model_config = ConfigDict(frozen=True)

    time_unit_years: float = Field(5.0, gt=0)
    theta_min: float = Field(1e-4, gt=0)
    theta_max: float = 2.0
    grid_points: int = Field(400, ge=10)
    refine_tol: float = Field(1e-12, gt=0)
    start_year: int = Field(2010, ge=2005, le=2050)
    min_valid_points: int = Field(6, ge=2)
    exclusion_rel_tol: float = Field(1e-9, ge=0)
    max_workers: int = Field(4, ge=1)

    @model_validator(mode='after')
    def _check_bounds(self) -> 'FitConfig':
        if not self.theta_min < self.theta_max:
            raise ValueError(f"theta_min ({self.theta_min}) must be below theta_max ({self.theta_max})")
        return self


class EnsembleConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = 42
    bootstrap_samples: int = Field(5000, ge=1000)
    histogram_bins: int = Field(10, ge=1)
    statistics: Tuple[str, ...] = ("mean", "median", "p25", "p75")
    horizon_year: int = 2100
    reference_halving_years: float = Field(60.0, gt=0)

    @field_validator('statistics')
    @classmethod
    def _known_statistics(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [name for name in value if name not in STATISTICS]
        if unknown:
            raise ValueError(f"unknown statistics {unknown}; choose from {list(STATISTICS)}")
        return value


class LognormalConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    sample_size: Optional[int] = Field(None, ge=2)
    density_points: int = Field(200, ge=2)
    density_x_max: Optional[float] = Field(None, gt=0)


class RunConfig(BaseModel):
    """Everything one CLI invocation needs"""

    model_config = ConfigDict(frozen=True)

    input_path: Optional[Path] = None
    output_dir: Path = Path("output")
    formats: Tuple[str, ...] = FORMATS
    u_max_override: Optional[float] = Field(None, gt=0)
    trajectory_scenarios: Tuple[str, ...] = ("SSP1-19", "SSP2-34", "SSP3-60", "SSP4-45", "SSP5-60")
    reference_path: Optional[Path] = None
    log_level: str = "INFO"

    ingest: IngestConfig = IngestConfig()
    fit: FitConfig = FitConfig()
    ensemble: EnsembleConfig = EnsembleConfig()
    lognormal: LognormalConfig = LognormalConfig()

    @field_validator('formats')
    @classmethod
    def _known_formats(cls, value: Tuple[str, ...]) -> Tuple[str, ...]:
        unknown = [fmt for fmt in value if fmt not in FORMATS]
        if unknown or not value:
            raise ValueError(f"formats must be a non-empty subset of {list(FORMATS)}, got {list(value)}")
        return value

    @model_validator(mode='after')
    def _check_start_year(self) -> 'RunConfig':
        if self.ingest.start_year != self.fit.start_year:
            raise ValueError(
                f"ingest.start_year ({self.ingest.start_year}) and fit.start_year ({self.fit.start_year}) differ"
            )
        return self

    # Flat accessors used by the CLI and the pipeline
    @property
    def region(self) -> str:
        return self.ingest.region

    @property
    def start_year(self) -> int:
        return self.ingest.start_year

    @property
    def seed(self) -> int:
        return self.ensemble.seed

    @property
    def bootstrap_samples(self) -> int:
        return self.ensemble.bootstrap_samples


def _read_yaml(config_path: Path, explicit: bool = False) -> Dict[str, Any]:
    """Read the YAML defaults; a missing default file means built-in defaults"""
    if not config_path.exists():
        if explicit:
            raise ConfigError("Config file not found", context=str(config_path))
        logger.debug(f"No config file at {config_path}, using built-in defaults")
        return {}
    try:
        with open(config_path, 'r') as file:
            return yaml.safe_load(file) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Invalid YAML: {e}", context=str(config_path)) from e


def _build(raw: Mapping[str, Any]) -> RunConfig:
    """Validate a nested settings mapping into a RunConfig"""
    data = {key: dict(value) if isinstance(value, Mapping) else value for key, value in raw.items()}

    report = data.pop('report', None) or {}
    logging_section = data.pop('logging', None) or {}
    for key, value in report.items():
        data.setdefault(key, value)
    if 'level' in logging_section:
        data.setdefault('log_level', logging_section['level'])

    # fit shares the start year and point minimum with ingest
    ingest = data.setdefault('ingest', {})
    fit = data.setdefault('fit', {})
    if 'start_year' in ingest:
        fit['start_year'] = ingest['start_year']
    if 'min_points' in ingest:
        fit.setdefault('min_valid_points', ingest['min_points'])

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration: {e}") from e


def load_settings(config_path: Optional[Path] = None,
                  env: Optional[Mapping[str, str]] = None) -> RunConfig:
    """
    Load layered settings

    Args:
        config_path: YAML file (defaults to config/config.yaml)
        env: Environment mapping; defaults to os.environ after loading .env

    Returns:
        Validated RunConfig
    """
    if env is None:
        load_dotenv()
        env = os.environ

    raw = _read_yaml(Path(config_path), explicit=True) if config_path else _read_yaml(DEFAULT_CONFIG_PATH)

    for variable, (section, key) in ENV_OVERRIDES.items():
        value = env.get(variable)
        if value is None or value == "":
            continue
        logger.debug(f"Applying {variable} from environment")
        if section is None:
            raw[key] = value
        else:
            raw.setdefault(section, {})
            raw[section] = {**raw[section], key: value}

    return _build(raw)


def apply_overrides(config: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """
    Apply CLI flag values on top of a loaded config

    Args:
        config: Base configuration
        overrides: Flat mapping (region, start_year, time_unit_years, u_max_override,
            seed, bootstrap_samples, input_path, output_dir, formats, max_workers); None values are skipped

    Returns:
        New validated RunConfig
    """
    placement = {
        'region': 'ingest',
        'start_year': 'ingest',
        'time_unit_years': 'fit',
        'max_workers': 'fit',
        'seed': 'ensemble',
        'bootstrap_samples': 'ensemble',
    }
    data = config.model_dump()
    for key, value in overrides.items():
        if value is None:
            continue
        section = placement.get(key)
        if section is None:
            data[key] = value
        else:
            data[section][key] = value
    data['fit']['start_year'] = data['ingest']['start_year']
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid command-line value: {e}") from e


def configure_logging(level: str = "INFO") -> None:
    """Configure root logging the same way for the CLI and scripts"""
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO), format=LOG_FORMAT)
