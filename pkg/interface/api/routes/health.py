"""Health check route handler."""

from fastapi import APIRouter, Depends

from core.config import TOOL_VERSION
from interface.api.dependencies import ArchiveState, get_archive_state
from interface.api.schemas import HealthResponse

router = APIRouter(prefix="/health", tags=["System"])


@router.get("", response_model=HealthResponse)
async def health_check(state: ArchiveState = Depends(get_archive_state)) -> HealthResponse:
    """Health check with the number of captures served."""
    return HealthResponse(
        status="healthy",
        version=TOOL_VERSION,
        captures=sum(len(captures) for captures in state.captures.values()),
    )
