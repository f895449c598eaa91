# nphisd/config.py
from typing import Optional

from pydantic import BaseSettings


class Settings(BaseSettings):
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"
    OUTPUT_DIR: str = "runs"
    # e.g. sqlite:///./landscapes.db; unset means no database mirror
    DATABASE_URL: Optional[str] = None
    JOBS: int = 1
    SEED: int = 0
    DEBUG_INVARIANTS: bool = False

    class Config:
        env_prefix = "NPHISD_"
        env_file = ".env"

settings = Settings()
