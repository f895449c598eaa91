# nphisd/db.py
from functools import lru_cache
from typing import Optional

from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, declarative_base, sessionmaker

from .config import settings

# Base class that all ORM records inherit from
Base = declarative_base()


@lru_cache(maxsize=None)
def get_engine(url: Optional[str] = None) -> Engine:
    """
    Engine for `url`, or for settings.DATABASE_URL.

    The database is optional, so nothing is created until a command asks
    for it.
    """
    url = url or settings.DATABASE_URL
    if not url:
        raise ValueError("no database configured: set NPHISD_DATABASE_URL")
    return create_engine(
        url,
        connect_args={"check_same_thread": False} if url.startswith("sqlite") else {},
    )


def SessionLocal(url: Optional[str] = None) -> Session:
    """New session bound to the configured engine."""
    factory = sessionmaker(autocommit=False, autoflush=False, bind=get_engine(url))
    return factory()


def init_db(url: Optional[str] = None) -> None:
    """
    Create the landscape tables if they don't exist yet.

    Imports the records module so that SQLAlchemy knows every mapped class.
    """
    from . import records  # noqa: F401
    Base.metadata.create_all(bind=get_engine(url))
