"""
matchbench - Application Settings
Configurable settings with environment variable and config file support.

Precedence: explicit overrides (CLI flags) > MATCHBENCH_* environment
variables > JSON config file > defaults.
"""

import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Type

from pydantic import BaseModel, Field, SecretStr, ValidationError, field_validator
from pydantic_settings import (
    BaseSettings,
    JsonConfigSettingsSource,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
)

from ..core.errors import ConfigError
from .constants import (
    DEFAULT_BACKOFF_BASE_S,
    DEFAULT_BACKOFF_CAP_S,
    DEFAULT_BASE_URL,
    DEFAULT_CONCURRENCY,
    DEFAULT_CONFIG_FILE,
    DEFAULT_MAX_REQUESTS,
    DEFAULT_MAX_RETRIES,
    DEFAULT_MODEL,
    DEFAULT_REPORTS_DIR,
    DEFAULT_RUNS,
    DEFAULT_RUNS_DIR,
    DEFAULT_SCOPES,
    DEFAULT_TIMEOUT_S,
    DEFAULT_VOTES,
)


def config_file_path() -> Path:
    """Config file location: MATCHBENCH_CONFIG or matchbench.json in the working directory."""
    return Path(os.environ.get("MATCHBENCH_CONFIG", DEFAULT_CONFIG_FILE))


class LLMSettings(BaseModel):
    """Completion backend configuration."""
    model: str = DEFAULT_MODEL
    timeout_s: float = Field(default=DEFAULT_TIMEOUT_S, gt=0)
    max_retries: int = Field(default=DEFAULT_MAX_RETRIES, ge=0)
    backoff_base_s: float = Field(default=DEFAULT_BACKOFF_BASE_S, ge=0)
    backoff_cap_s: float = Field(default=DEFAULT_BACKOFF_CAP_S, ge=0)
    concurrency: int = Field(default=DEFAULT_CONCURRENCY, ge=1)
    max_requests: int = Field(default=DEFAULT_MAX_REQUESTS, ge=0)
    backend: str = "live"  # "live" or "mock"
    mock_policy: str = "oracle:eps=0"


class ExperimentSettings(BaseModel):
    """Protocol knobs: repetitions and votes per job."""
    runs: int = Field(default=DEFAULT_RUNS, ge=1)
    votes: int = Field(default=DEFAULT_VOTES, ge=1)
    scopes: List[str] = Field(default_factory=lambda: list(DEFAULT_SCOPES))

    @field_validator("votes")
    @classmethod
    def _odd_votes(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("votes must be odd so that a strict majority exists")
        return value


class PromptSettings(BaseModel):
    """Prompt template configuration."""
    template_path: Optional[str] = None  # None = bundled default template
    persona_as_system: bool = False


class StorageSettings(BaseModel):
    """Storage path configuration."""
    benchmark_path: str = "bench/mini"
    runs_dir: str = DEFAULT_RUNS_DIR
    reports_dir: str = DEFAULT_REPORTS_DIR


class AppSettings(BaseSettings):
    """Main application settings."""
    app_name: str = "matchbench"
    version: str = "1.0.0"

    # Flat so that MATCHBENCH_API_KEY / MATCHBENCH_BASE_URL apply directly
    api_key: Optional[SecretStr] = None
    base_url: str = DEFAULT_BASE_URL

    llm: LLMSettings = LLMSettings()
    experiment: ExperimentSettings = ExperimentSettings()
    prompt: PromptSettings = PromptSettings()
    storage: StorageSettings = StorageSettings()

    model_config = SettingsConfigDict(
        env_prefix="MATCHBENCH_",
        env_nested_delimiter="__",
        extra="ignore",
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (
            init_settings,
            env_settings,
            JsonConfigSettingsSource(settings_cls, json_file=config_file_path()),
        )


class SettingsManager:
    """
    Holds the process-wide settings instance.
    Overrides from the command line are merged on top and re-validated.
    """

    _instance: Optional['SettingsManager'] = None
    _settings: Optional[AppSettings] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self):
        if self._settings is None:
            self._load_settings()

    def _load_settings(self):
        """Load settings from environment and config file."""
        try:
            self._settings = AppSettings()
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration: {e}") from e

    @property
    def settings(self) -> AppSettings:
        """Get current settings."""
        return self._settings

    def get(self, key: str, default=None):
        """Get a setting value by key (supports dot notation)."""
        value: Any = self._settings.model_dump()
        for k in key.split("."):
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    def update(self, **kwargs) -> AppSettings:
        """Merge overrides into the current settings; None values are ignored."""
        current_data = self._settings.model_dump()

        for key, value in kwargs.items():
            if value is None or key not in current_data:
                continue
            if isinstance(current_data[key], dict) and isinstance(value, dict):
                current_data[key].update({k: v for k, v in value.items() if v is not None})
            else:
                current_data[key] = value

        try:
            self._settings = AppSettings(**current_data)
        except ValidationError as e:
            raise ConfigError(f"Invalid configuration: {e}") from e
        return self._settings

    def api_key(self) -> Optional[str]:
        """Plain API key or None."""
        secret = self._settings.api_key
        return secret.get_secret_value() if secret else None

    @classmethod
    def reset(cls) -> None:
        """Drop the cached settings; the next access reloads them."""
        SettingsManager._settings = None
        SettingsManager._instance = None


def get_settings() -> AppSettings:
    """Get the global settings instance."""
    return SettingsManager().settings


def get_settings_manager() -> SettingsManager:
    """Get the settings manager instance."""
    return SettingsManager()
