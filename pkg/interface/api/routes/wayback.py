"""Availability API and raw snapshot routes."""

import re

from fastapi import APIRouter, Depends, HTTPException, Request, Response

from core.logging import get_logger
from interface.api.dependencies import ArchiveState, get_archive_state
from interface.api.schemas import AvailabilityResponse, ClosestSnapshot

logger = get_logger(__name__)

router = APIRouter(tags=["Wayback"])

_RAW_PATH = re.compile(r"^/web/(\d{14})id_/(.*)$")


def _original_url(request: Request) -> tuple[str, str]:
    """Split a raw-content request into (timestamp, original URL).

    The undecoded request path is used so percent-escapes in the archived URL
    survive; a query string belongs to the archived URL.
    """
    raw_path = request.scope.get("raw_path") or request.url.path.encode("utf-8")
    # some servers pass the query string inside raw_path
    match = _RAW_PATH.match(raw_path.decode("latin-1").split("?", 1)[0])
    if not match:
        raise HTTPException(status_code=404, detail="Not an archived URL")
    timestamp, url = match.groups()
    query = request.scope.get("query_string", b"").decode("latin-1")
    return timestamp, f"{url}?{query}" if query else url


@router.get("/wayback/available", response_model=AvailabilityResponse)
async def availability(
    request: Request,
    url: str,
    timestamp: str | None = None,
    state: ArchiveState = Depends(get_archive_state),
):
    """Closest capture of ``url`` to ``timestamp``."""
    state.log_request(request, "lookup")
    if state.take_failure("lookup", url):
        logger.debug("Scripted lookup failure", url=url)
        return Response(status_code=503)
    error_status = state.fixture.lookup_errors.get(url)
    if error_status:
        raise HTTPException(status_code=error_status, detail="Lookup refused")

    capture = state.closest(url, timestamp)
    if capture is None:
        return AvailabilityResponse(url=url)
    base = str(request.base_url).rstrip("/")
    return AvailabilityResponse(
        url=url,
        archived_snapshots={
            "closest": ClosestSnapshot(
                status=str(capture.status),
                available=capture.available,
                url=f"{base}/web/{capture.timestamp}/{capture.url}",
                timestamp=capture.timestamp,
            )
        },
    )


@router.get("/web/{timestamp}id_/{url:path}")
async def raw_snapshot(request: Request, state: ArchiveState = Depends(get_archive_state)) -> Response:
    """Archived payload bytes without any injected markup."""
    state.log_request(request, "fetch")
    timestamp, url = _original_url(request)
    if state.take_failure("fetch", url):
        logger.debug("Scripted fetch failure", url=url)
        return Response(status_code=503)
    error_status = state.fixture.fetch_errors.get(url)
    if error_status:
        raise HTTPException(status_code=error_status, detail="Fetch refused")

    capture = state.find(url, timestamp)
    if capture is None or not capture.available:
        raise HTTPException(status_code=404, detail="Capture not found")
    return Response(content=capture.payload, media_type=capture.content_type)
