"""Runtime settings read from the environment."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    """Process-level knobs that are not part of a run's reproducible config."""

    # Upper bound on concurrently trained folds / ablation cells
    threads: int = Field(default=1, ge=1)
    log_level: str = Field(default="INFO")
    show_progress: bool = Field(default=True)

    model_config = SettingsConfigDict(
        env_prefix="DASTGC_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )


def load_settings() -> RuntimeSettings:
    """Read settings fresh from the current environment."""
    return RuntimeSettings()
