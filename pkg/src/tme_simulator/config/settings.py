"""Runtime settings for the tissue microenvironment simulator."""

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    Simulation parameters live in :class:`~tme_simulator.models.SimulationConfig`
    documents; these settings only control how the simulator runs.
    """

    model_config = SettingsConfigDict(
        env_prefix="TME_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Execution Configuration
    worker_processes: int = Field(
        default=1,
        description="Number of worker processes used to simulate seeds in parallel",
        ge=1,
        le=64,
    )
    iteration_cap_factor: int = Field(
        default=50,
        description="Safety cap on optimization steps, as a multiple of pixel count",
        ge=1,
    )
    telemetry_log_every: int = Field(
        default=1000,
        description="Emit a debug progress record every N optimization steps",
        ge=1,
    )

    # Output Configuration
    output_dir: str = Field(
        default="data/cohort",
        description="Default cohort output directory",
    )

    # Logging Configuration
    log_level: str = Field(
        default="INFO",
        description="Logging level",
        pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$",
    )
    log_format: str = Field(
        default="text",
        description="Log format (json or text)",
        pattern="^(json|text)$",
    )


# Global settings instance
settings = Settings()
