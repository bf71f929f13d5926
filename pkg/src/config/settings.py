from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache

class Settings(BaseSettings):
    log_dir: str = "logs"
    log_level: str = "INFO"
    log_to_file: bool = True

    # worker threads for independent (k, j) work items
    max_workers: int = 1

    model_config = SettingsConfigDict(
        env_prefix="CHANNEL_UC_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        frozen=True
    )

@lru_cache
def get_settings():
    return Settings()
