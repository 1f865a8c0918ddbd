import logging
from pathlib import Path

from sqlalchemy import create_engine, event
from sqlalchemy.engine import Engine
from sqlalchemy.orm import declarative_base, sessionmaker

from app.config import Settings
from app.errors import ValidationError

logger = logging.getLogger(__name__)

Base = declarative_base()


def prepare_data_dir(data_dir: Path) -> Path:
    """Create the storage root, failing loudly when it is not a writable directory."""
    data_dir = Path(data_dir)
    try:
        data_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ValidationError(f"cannot use data dir {data_dir}: {exc}") from exc
    if not data_dir.is_dir():
        raise ValidationError(f"data dir {data_dir} is not a directory")
    probe = data_dir / ".write-probe"
    try:
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise ValidationError(f"data dir {data_dir} is not writable: {exc}") from exc
    return data_dir


def make_engine(settings: Settings) -> Engine:
    url = settings.resolved_database_url
    if settings.database_url is None:
        prepare_data_dir(settings.data_dir)
    engine = create_engine(
        url,
        connect_args={"check_same_thread": False, "timeout": 30}
        if url.startswith("sqlite")
        else {},
    )
    if url.startswith("sqlite"):
        # acknowledged writes must survive a restart
        @event.listens_for(engine, "connect")
        def _sqlite_pragmas(dbapi_connection, _record):
            cursor = dbapi_connection.cursor()
            cursor.execute("PRAGMA journal_mode=WAL")
            cursor.execute("PRAGMA synchronous=FULL")
            cursor.close()

    Base.metadata.create_all(bind=engine)
    logger.info("storage ready at %s", url)
    return engine


def make_session_factory(engine: Engine) -> sessionmaker:
    return sessionmaker(autocommit=False, autoflush=False, bind=engine)
