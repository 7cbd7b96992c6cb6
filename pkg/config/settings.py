"""Configuration management for the els toolkit."""

import os
from typing import Optional

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings loaded from the environment and ``.env``."""

    # Logging
    log_level: str = Field(default="INFO", validation_alias="LOG_LEVEL")
    log_file: Optional[str] = Field(
        default=None,
        description="Log file path; file logging is disabled when unset",
        validation_alias="LOG_FILE",
    )

    # Execution
    els_threads: int = Field(
        default_factory=lambda: os.cpu_count() or 1,
        description="Upper bound on concurrently executing sweep runs",
        validation_alias="ELS_THREADS",
    )
    output_dir: str = Field(default="runs", validation_alias="ELS_OUTPUT_DIR")
    default_seed: int = Field(default=0, validation_alias="ELS_SEED")

    # Numerical guards
    divergence_threshold: float = Field(
        default=1e8,
        description="Magnitude beyond which a field is declared divergent",
        validation_alias="ELS_DIVERGENCE_THRESHOLD",
    )
    energy_slack_abs: float = Field(
        default=1e-8, validation_alias="ELS_ENERGY_SLACK_ABS"
    )
    energy_slack_truncation: float = Field(
        default=10.0,
        description="Factor multiplying dt*dr^2 in the per-step energy slack",
        validation_alias="ELS_ENERGY_SLACK_TRUNCATION",
    )

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    def energy_slack(self, dt: float, dr: float) -> float:
        """Per-step tolerance for energy monotonicity checks."""
        return self.energy_slack_abs + self.energy_slack_truncation * dt * dr * dr


def get_settings() -> Settings:
    """Get settings instance."""
    return Settings()  # type: ignore[call-arg]


# Global instance
settings = get_settings()
