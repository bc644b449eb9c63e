# src/database/connection.py
import logging
import os
from pathlib import Path
from typing import Generator, Optional, Union

from sqlalchemy import create_engine, event, text
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker
from sqlalchemy.pool import StaticPool

logger = logging.getLogger(__name__)

DEFAULT_OUT_DIR = "runs"


def get_registry_url(out_dir: Optional[Union[str, Path]] = None, configured: Optional[str] = None) -> str:
    """
    URL del run registry.

    Precedenza: GORE_REGISTRY_URL, poi registry_url della config,
    poi un file SQLite <out_dir>/runs.db.
    """
    url = os.getenv("GORE_REGISTRY_URL") or configured
    if url:
        return url
    out_dir = Path(out_dir or os.getenv("GORE_OUT_DIR", DEFAULT_OUT_DIR))
    return f"sqlite:///{(out_dir / 'runs.db').as_posix()}"


def _enable_sqlite_foreign_keys(dbapi_connection, connection_record):
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA foreign_keys=ON")
    cursor.close()


def create_registry_engine(url: str) -> Engine:
    """Engine per il registry; SQLite condiviso tra i thread di --matrix"""
    echo = os.getenv("DB_ECHO", "false").lower() == "true"
    if url.startswith("sqlite"):
        if url in ("sqlite://", "sqlite:///:memory:"):
            engine = create_engine(
                url, connect_args={"check_same_thread": False}, poolclass=StaticPool, echo=echo
            )
        else:
            db_path = url.split("///", 1)[-1]
            Path(db_path).parent.mkdir(parents=True, exist_ok=True)
            engine = create_engine(url, connect_args={"check_same_thread": False}, echo=echo)
        event.listen(engine, "connect", _enable_sqlite_foreign_keys)
        return engine

    return create_engine(
        url,
        pool_size=10,
        max_overflow=20,
        pool_pre_ping=True,
        pool_recycle=3600,
        echo=echo,
    )


def create_session_factory(engine: Engine) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)


def ensure_schema(engine: Engine) -> None:
    """Crea le tabelle mancanti (le migration Alembic restano la via per i DB gestiti)"""
    from src.models import BaseModel

    BaseModel.metadata.create_all(engine)


def session_dependency(factory: sessionmaker):
    """Dependency FastAPI legata a una session factory"""
    def get_db() -> Generator[Session, None, None]:
        db = factory()
        try:
            yield db
        finally:
            db.close()
    return get_db


def check_database_connection(engine: Engine) -> bool:
    try:
        with engine.connect() as conn:
            conn.execute(text("SELECT 1"))
        return True
    except Exception as e:
        logger.error(f"Registry connection failed: {e}")
        return False
