from pydantic_settings import BaseSettings
from functools import lru_cache


class Settings(BaseSettings):
    DATABASE_URL: str = "sqlite:///./vcs_runs.db"
    RECORD_RUNS: bool = False
    LOG_LEVEL: str = "INFO"
    LOG_FILE: str = ""  # empty disables the file handler
    DEBUG: bool = False  # finite checks after updates, tracebacks on failure
    SIGMOID_TABLE_SIZE: int = 1024
    SIGMOID_BOUND: float = 6.0
    ALPHA_FLOOR_RATIO: float = 1e-4
    PROGRESS_SYNC_INTERVAL: int = 1000
    EVAL_RUNS: int = 10

    class Config:
        env_file = ".env"
        env_file_encoding = "utf-8"


@lru_cache()
def get_settings() -> Settings:
    return Settings()
