"""Application configuration using pydantic-settings."""

import sys
from functools import lru_cache
from typing import Literal

from pydantic_settings import BaseSettings, SettingsConfigDict

# Numerical defaults. These are flags-only and never read from the environment.
DEFAULT_TOL = 1e-10
DEFAULT_FLOW_TOL = 1e-8
MAX_FLOW_LEVEL = 14
DEFAULT_MAX_DIM = 64
DEFAULT_THREADS = 1
JACOBI_MAX_SWEEPS = 100
DEDUP_DISTANCE = 1e-14
DLOG_SWITCH = 1e-8
# Smallest inner tolerance a flow hands to its resolvent solves (256 machine epsilons).
INNER_TOL_FLOOR = 256 * sys.float_info.epsilon


class Settings(BaseSettings):
    """Runtime settings loaded from KARCHER_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="KARCHER_",
        case_sensitive=False,
        extra="ignore",
    )

    # Experiments
    seed: int = 0

    # Logging (presentation only)
    log_level: Literal["debug", "info", "warning", "error"] = "warning"
    log_json: bool = False


@lru_cache
def get_settings() -> Settings:
    """Get cached settings instance."""
    return Settings()
