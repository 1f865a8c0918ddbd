import logging
import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv
from pydantic import BaseModel

load_dotenv()

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseModel):
    data_dir: Path = Path("./pondwatch-data")
    database_url: Optional[str] = None
    log_level: str = "INFO"
    host: str = "127.0.0.1"
    port: int = 8000

    @property
    def resolved_database_url(self) -> str:
        if self.database_url:
            return self.database_url
        return f"sqlite:///{(self.data_dir / 'pondwatch.db').as_posix()}"


def settings_from_env(**overrides) -> Settings:
    """Build settings from PONDWATCH_* environment variables plus explicit overrides."""
    values = {
        "data_dir": os.getenv("PONDWATCH_DATA_DIR", "./pondwatch-data"),
        "database_url": os.getenv("PONDWATCH_DATABASE_URL") or None,
        "log_level": os.getenv("PONDWATCH_LOG_LEVEL", "INFO"),
        "host": os.getenv("PONDWATCH_HOST", "127.0.0.1"),
        "port": int(os.getenv("PONDWATCH_PORT", "8000")),
    }
    values.update({k: v for k, v in overrides.items() if v is not None})
    return Settings(**values)


@lru_cache
def get_settings() -> Settings:
    return settings_from_env()


def configure_logging(level: str = "INFO") -> None:
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, force=True)
