import logging
from contextlib import asynccontextmanager

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from app.exception.exception import register_exception_handlers
from app.logger import configure_logging

from .api_routes import api_router

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(_: FastAPI):
    configure_logging()
    logger.info("[SERVER] Logging configured")
    yield


def create_app() -> FastAPI:
    logger.info("[SERVER] Initializing FastAPI application")
    app = FastAPI(title="kgqa", lifespan=lifespan)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_credentials=True,
        allow_methods=["*"],
        allow_headers=["*"],
    )

    register_exception_handlers(app)
    logger.info("[SERVER] Registered custom exception handlers")

    app.include_router(api_router, prefix="/api")
    logger.info("[SERVER] Added ask and knowledge routers")
    return app


app = create_app()

if __name__ == "__main__":
    import uvicorn

    configure_logging()
    logger.info("[SERVER] Starting Uvicorn server...")
    uvicorn.run(app, host="0.0.0.0", port=8000)
