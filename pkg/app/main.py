import logging
from contextlib import asynccontextmanager
from typing import Optional

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app import __version__
from app.config import Settings, get_settings
from app.database import make_engine, make_session_factory
from app.routers import channels, update
from app.services.channel_store import ChannelStore

logger = logging.getLogger(__name__)


def create_app(settings: Optional[Settings] = None) -> FastAPI:
    """
    Build the telemetry service over the storage named by `settings`.

    Storage is opened eagerly so a bad data dir fails before the server binds.
    """
    settings = settings or get_settings()
    engine = make_engine(settings)
    store = ChannelStore(make_session_factory(engine))

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        logger.info("pondwatch serving data from %s", settings.data_dir)
        yield
        engine.dispose()
        logger.info("storage closed")

    app = FastAPI(
        title="pondwatch",
        description="Pond telemetry channels with CSV, JSON and XML feed export",
        version=__version__,
        lifespan=lifespan,
    )
    app.state.settings = settings
    app.state.engine = engine
    app.state.store = store

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    app.include_router(update.router)
    app.include_router(channels.router)

    @app.get("/healthz")
    async def health_check():
        return {"status": "healthy"}

    return app
