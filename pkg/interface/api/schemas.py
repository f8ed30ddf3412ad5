"""Pydantic schemas for the mock archive service."""

from datetime import UTC, datetime

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import parse_timestamp14


class HealthResponse(BaseModel):
    """Health check response schema."""

    status: str = Field(..., description="Health status", examples=["healthy"])
    timestamp: datetime = Field(default_factory=lambda: datetime.now(UTC), description="Response timestamp")
    version: str = Field(..., description="Service version", examples=["0.1.0"])
    captures: int = Field(0, description="Number of captures served")


class Capture(BaseModel):
    """One archived capture of an original URL."""

    url: str = Field(..., description="Original URL as it will be queried")
    timestamp: str = Field(..., description="14-digit capture timestamp")
    status: int = Field(200, description="HTTP status recorded at capture time")
    available: bool = True
    body: str = ""
    body_encoding: str = Field("utf-8", description="Codec used to turn body into payload bytes")
    content_type: str = "text/html; charset=utf-8"
    closest: bool = Field(False, description="Force this capture as the closest answer")

    @field_validator("timestamp")
    @classmethod
    def validate_timestamp(cls, v: str) -> str:
        parse_timestamp14(v)
        return v

    @property
    def payload(self) -> bytes:
        return self.body.encode(self.body_encoding)


class ArchiveFixture(BaseModel):
    """Captures and scripted failures served by the mock archive."""

    captures: list[Capture] = Field(default_factory=list)
    lookup_failures: dict[str, int] = Field(default_factory=dict, description="URL -> leading 503 answers on lookup")
    fetch_failures: dict[str, int] = Field(default_factory=dict, description="URL -> leading 503 answers on raw fetch")
    lookup_errors: dict[str, int] = Field(default_factory=dict, description="URL -> permanent 4xx lookup status")
    fetch_errors: dict[str, int] = Field(default_factory=dict, description="URL -> permanent 4xx fetch status")


class ClosestSnapshot(BaseModel):
    status: str
    available: bool
    url: str
    timestamp: str


class AvailabilityResponse(BaseModel):
    """Availability API answer; ``archived_snapshots`` is empty when nothing is held."""

    url: str
    archived_snapshots: dict[str, ClosestSnapshot] = Field(default_factory=dict)

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "url": "http://example.com",
                "archived_snapshots": {
                    "closest": {
                        "status": "200",
                        "available": True,
                        "url": "http://archive.test/web/20060215000000/http://example.com",
                        "timestamp": "20060215000000",
                    }
                },
            }
        }
    )
