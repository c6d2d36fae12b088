"""Process-wide settings loaded from the environment (prefix RYDEIT_) and .env"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="RYDEIT_", env_file=".env", extra="ignore")

    threads: int = 1
    log_level: str = "INFO"
    output_dir: str = "out"

    # numeric knobs
    golden_rtol: float = 1e-9
    potential_cap_factor: float = 1e6
    narrowband_factor: float = 0.2
    asymptotic_min_detuning: float = 5.0
    block_rows: int = 32

    run_acceptance: bool = False


@lru_cache()
def get_settings() -> Settings:
    return Settings()


def thread_count(requested: int = None) -> int:
    """CLI value wins over the environment; never below one worker"""
    if requested is None:
        requested = get_settings().threads
    return max(1, min(int(requested), os.cpu_count() or 1))
