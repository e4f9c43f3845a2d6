"""Process-level settings — loaded from PROSPLAT_* environment variables."""

from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class RuntimeSettings(BaseSettings):
    # Worker cap for every thread pool; 0 means os.cpu_count()
    threads: int = Field(default=0, ge=0)

    log_level: str = "INFO"

    model_config = SettingsConfigDict(env_prefix="PROSPLAT_", env_file=".env",
                                      env_file_encoding="utf-8", extra="ignore")


@lru_cache()
def get_settings() -> RuntimeSettings:
    return RuntimeSettings()
