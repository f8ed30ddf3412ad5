"""Mock Wayback Machine service for offline crawls and tests."""

import json
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI

from core.config import TOOL_VERSION
from core.logging import configure_logging, get_logger
from interface.api.dependencies import ArchiveState
from interface.api.routes import health, wayback
from interface.api.schemas import ArchiveFixture

logger = get_logger(__name__)


def create_app(fixture: ArchiveFixture | None = None, clock=None) -> FastAPI:
    """Build a mock archive app serving ``fixture``.

    The state (captures, scripted failures, request log) is reachable as
    ``app.state.archive``.
    """

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        logger.info("Mock archive started", captures=len(app.state.archive.fixture.captures))
        yield
        logger.info("Mock archive shutdown", requests=len(app.state.archive.request_log))

    app = FastAPI(
        title="Mock Wayback Archive",
        version=TOOL_VERSION,
        description="Availability API and raw snapshots served from a fixture",
        lifespan=lifespan,
    )
    fixture = fixture or ArchiveFixture()
    app.state.archive = ArchiveState(fixture) if clock is None else ArchiveState(fixture, clock=clock)

    app.include_router(health.router)
    app.include_router(wayback.router)
    return app


def load_fixture(path: Path) -> ArchiveFixture:
    """Read a fixture JSON file."""
    with open(path, encoding="utf-8") as f:
        return ArchiveFixture.model_validate(json.load(f))


def main():
    """Run the mock archive with uvicorn."""
    import argparse

    import uvicorn

    from core.config import settings

    parser = argparse.ArgumentParser(description="Serve a mock Wayback archive from a fixture file")
    parser.add_argument("fixture", type=Path, help="JSON fixture with captures and scripted failures")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8765)
    args = parser.parse_args()

    configure_logging(log_level=settings.LOG_LEVEL, log_format=settings.LOG_FORMAT)
    app = create_app(load_fixture(args.fixture))
    logger.info(
        "Starting mock archive",
        host=args.host,
        port=args.port,
        endpoint=f"http://{args.host}:{args.port}/wayback/available",
    )
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
