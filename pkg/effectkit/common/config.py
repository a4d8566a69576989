from __future__ import annotations

from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from pydantic import Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ..models.numerics import TolerancePolicy
from .errors import ValidationError
from .logging import get_logger

logger = get_logger(__name__)

# Define paths
DOTENV_FILE = Path(__file__).parent.parent.parent / Path(".env")
DATA_DIR = Path(__file__).parent.parent / "data"
PRESETS_FILE = "scenarios.yaml"

TOLERANCE_FIELDS = {
    "eig_zero": "EIG_ZERO",
    "psd_slack": "PSD_SLACK",
    "rank_rel": "RANK_REL",
    "membership": "MEMBERSHIP_TOL",
}
ORACLE_FIELDS = {
    "feas_tol": "FEAS_TOL",
    "max_iter": "DYKSTRA_MAX_ITER",
    "plateau_window": "PLATEAU_WINDOW",
}

class Settings(BaseSettings):
    """Toolkit settings, read from EFFECTKIT_* environment variables and .env."""
    model_config = SettingsConfigDict(
        env_prefix="EFFECTKIT_",
        env_file=DOTENV_FILE,
        case_sensitive=True,
        extra="ignore",
    )

    # Application settings
    DEBUG: bool = Field(False)
    LOG_LEVEL: str = Field('INFO')
    LOG_FILE: Optional[str] = Field(None)
    OUTPUT_DIR: str = Field('out')

    # Tolerance policy
    EIG_ZERO: float = Field(1e-9)
    PSD_SLACK: float = Field(1e-9)
    RANK_REL: float = Field(1e-9)
    MEMBERSHIP_TOL: float = Field(1e-8)

    # Feasibility oracle
    FEAS_TOL: float = Field(1e-7)
    DYKSTRA_MAX_ITER: int = Field(20000)
    PLATEAU_WINDOW: int = Field(200)

    # Model caps
    OSCILLATOR_MAX_TRUNCATION: int = Field(100)
    OUTCOME_FAMILY_K_MAX: int = Field(2)

    @model_validator(mode='after')
    def check_oracle(self) -> 'Settings':
        """Validate tolerances eagerly so a bad environment fails at startup."""
        self.tolerance_policy()
        if self.FEAS_TOL <= 0 or self.DYKSTRA_MAX_ITER < 1 or self.PLATEAU_WINDOW < 1:
            raise ValueError("oracle settings must be positive")
        return self

    def tolerance_policy(self) -> TolerancePolicy:
        return TolerancePolicy(
            eig_zero=self.EIG_ZERO,
            psd_slack=self.PSD_SLACK,
            rank_rel=self.RANK_REL,
            membership=self.MEMBERSHIP_TOL,
        )

    def oracle_options(self) -> Dict[str, Any]:
        return {
            "tol": self.FEAS_TOL,
            "max_iter": self.DYKSTRA_MAX_ITER,
            "plateau_window": self.PLATEAU_WINDOW,
        }

    def with_overrides(self, overrides: Dict[str, float]) -> 'Settings':
        """Copy with tolerance/oracle overrides given by lowercase key.

        Raises:
            KeyError: If a key is not a known tolerance or oracle setting
        """
        known = {**TOLERANCE_FIELDS, **ORACLE_FIELDS}
        update: Dict[str, Any] = {}
        for key, value in overrides.items():
            if key not in known:
                raise KeyError(f"Unknown tolerance override: {key}")
            update[known[key]] = value
        return Settings.model_validate({**self.model_dump(), **update})

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tolerances': self.tolerance_policy().model_dump(),
            'oracle': self.oracle_options(),
            'oscillator_max_truncation': self.OSCILLATOR_MAX_TRUNCATION,
            'outcome_family_k_max': self.OUTCOME_FAMILY_K_MAX,
        }

class ConfigManager:
    """Manages scenario configuration and preset YAML files."""

    def __init__(self, settings: Settings, data_dir: Optional[Path] = None) -> None:
        """Set up preset lookup.

        Args:
            settings: Toolkit settings
            data_dir: Directory holding preset YAML files (default: packaged data)
        """
        self.settings = settings
        self.data_dir = Path(data_dir) if data_dir else DATA_DIR

    def load_yaml(self, filename: Union[str, Path]) -> Dict[str, Any]:
        """Load a flat key-value YAML file.

        Relative names are looked up in the data directory first, then the
        working directory.

        Args:
            filename: Name or path of the YAML file

        Returns:
            The mapping stored in the file (empty for an empty file)

        Raises:
            FileNotFoundError: If no such file exists
            yaml.YAMLError: If the file is not valid YAML
            ValidationError: If the top level is not a mapping
        """
        file_path = Path(filename)
        if not file_path.is_absolute() and (self.data_dir / file_path).exists():
            file_path = self.data_dir / file_path
        if not file_path.exists():
            raise FileNotFoundError(f"No config file {filename}")

        try:
            with open(file_path) as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            logger.error(f"Cannot parse {file_path}: {e!s}")
            raise
        if data is not None and not isinstance(data, dict):
            raise ValidationError(f"{filename} must hold a key-value mapping")
        return data or {}

    def presets(self) -> Dict[str, Dict[str, Any]]:
        """Packaged default parameters per scenario."""
        try:
            return self.load_yaml(PRESETS_FILE)
        except FileNotFoundError:
            logger.warning(f"No presets file {PRESETS_FILE} in {self.data_dir}")
            return {}

# Process-wide instances, set by init_config()
_settings: Optional[Settings] = None
_config_manager: Optional[ConfigManager] = None

def init_config() -> None:
    """Build the process-wide settings and config manager."""
    global _settings, _config_manager

    if DOTENV_FILE.exists():
        logger.info(f"Reading settings overrides from {DOTENV_FILE}")
        _settings = Settings(_env_file=DOTENV_FILE)
    else:
        _settings = Settings()

    logger.debug(f"Effective settings: {_settings.to_dict()}")
    _config_manager = ConfigManager(_settings)

def get_settings() -> Settings:
    """Settings built by init_config().

    Raises:
        RuntimeError: If init_config() has not run
    """
    if not _settings:
        raise RuntimeError("init_config() must run before get_settings()")
    return _settings

def get_config_manager() -> ConfigManager:
    """Config manager built by init_config().

    Raises:
        RuntimeError: If init_config() has not run
    """
    if not _config_manager:
        raise RuntimeError("init_config() must run before get_config_manager()")
    return _config_manager
