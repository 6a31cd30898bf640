from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Настройки окружения (переменные HBOA_* и файл .env)"""

    model_config = SettingsConfigDict(
        env_prefix="HBOA_", env_file=".env", extra="ignore"
    )

    log_level: str = "INFO"
    log_file: str = "hboa.log"  # пустая строка отключает файловый лог
    workers: int = Field(default=1, ge=1)
    # Для трассировки разбиений: HBOA_SHOW_MODEL_LOGS=true + HBOA_LOG_LEVEL=DEBUG
    show_model_logs: bool = False


@lru_cache
def get_settings() -> Settings:
    """Кешированный экземпляр настроек"""
    return Settings()
