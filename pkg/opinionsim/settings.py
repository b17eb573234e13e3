"""
Environment settings.

Read once per process from OPINION_SIM_* variables (and an optional .env file):

    OPINION_SIM_THREADS=4        # cap on sweep workers, 0 = hardware default
    OPINION_SIM_LOG_LEVEL=INFO
    OPINION_SIM_DEFAULT_SEEDS=20 # ensemble size when --seeds is omitted
"""

from __future__ import annotations
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        env_prefix="OPINION_SIM_",
        env_file=".env",
        extra="ignore",
    )

    threads: int = Field(default=0, ge=0)
    log_level: str = "WARNING"
    default_seeds: int = Field(default=20, ge=1)

    @property
    def n_jobs(self) -> int:
        """joblib n_jobs value: -1 means all cores."""
        return -1 if self.threads == 0 else self.threads


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return Settings()
