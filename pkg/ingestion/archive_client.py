"""Wayback Machine availability lookups and raw snapshot fetching."""

from __future__ import annotations

import asyncio
import random
import re
import time
from collections import deque
from dataclasses import dataclass
from datetime import UTC, datetime

import httpx
from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import DEFAULT_TARGET_TIMESTAMP, parse_timestamp14
from core.errors import DataError, NetworkExhaustedError
from core.logging import get_logger
from ingestion.rate_limiter import START_HISTORY, HostRateLimiter

logger = get_logger(__name__)

USER_AGENT = "aolia-tools/0.1 (+reproducible corpus reconstruction)"
ACCEPTED_ARCHIVE_STATUSES = frozenset({200})

_WEB_PATH = re.compile(r"(/web/\d{14})(?:[a-z]{2}_)?/")


class Snapshot(BaseModel):
    """Closest archived capture reported by the availability API."""

    archive_url: str
    timestamp: str
    http_status: int
    available: bool

    @field_validator("timestamp")
    @classmethod
    def validate_timestamp(cls, v: str) -> str:
        parse_timestamp14(v)
        return v

    @property
    def is_acceptable(self) -> bool:
        """Only available, 200-status captures enter the corpus (redirect captures are rejected)."""
        return self.available and self.http_status in ACCEPTED_ARCHIVE_STATUSES


class FetchPolicy(BaseModel):
    """Politeness and retry settings for archive requests."""

    model_config = ConfigDict(frozen=True)

    target_timestamp: str = DEFAULT_TARGET_TIMESTAMP
    max_concurrency: int = Field(4, ge=1)
    min_request_interval_per_host: float = Field(1.0, ge=0)
    max_retries: int = Field(3, ge=0)
    backoff_base: float = Field(1.0, ge=0)
    backoff_jitter: float = Field(0.25, ge=0)
    per_url_budget: float = Field(300.0, ge=0)
    timeout: float = Field(30.0, gt=0)

    @field_validator("target_timestamp")
    @classmethod
    def validate_target(cls, v: str) -> str:
        parse_timestamp14(v)
        return v


@dataclass(frozen=True, slots=True)
class LookupResult:
    snapshot: Snapshot | None
    attempts: int


@dataclass(frozen=True, slots=True)
class FetchResult:
    payload: bytes
    content_type: str | None
    charset: str | None
    attempts: int
    fetched_at: str

    @property
    def byte_length(self) -> int:
        return len(self.payload)


class TransientExhaustedError(NetworkExhaustedError):
    """Transient failures persisted past the retry budget."""

    def __init__(self, url: str, attempts: int, reason: str):
        self.url = url
        self.attempts = attempts
        super().__init__(f"{url}: gave up after {attempts} attempts ({reason})")


class PermanentFetchError(DataError):
    """The archive answered with a non-retryable error status."""

    def __init__(self, url: str, status_code: int, attempts: int):
        self.url = url
        self.status_code = status_code
        self.attempts = attempts
        super().__init__(f"{url}: HTTP {status_code}")


def raw_archive_url(archive_url: str) -> str:
    """Rewrite an archive URL to its raw-content form (no injected banner markup)."""
    return _WEB_PATH.sub(r"\1id_/", archive_url, count=1)


def parse_availability(payload: dict) -> Snapshot | None:
    """Extract the closest snapshot from an availability API response."""
    closest = (payload.get("archived_snapshots") or {}).get("closest")
    if not closest or not closest.get("url") or not closest.get("timestamp"):
        return None
    status_text = str(closest.get("status", ""))
    return Snapshot(
        archive_url=closest["url"],
        timestamp=str(closest["timestamp"]),
        http_status=int(status_text) if status_text.isdigit() else 0,
        available=bool(closest.get("available", False)),
    )


class ArchiveClient:
    """Async client for the availability API and raw snapshot downloads.

    Every request passes the per-host politeness gate. Transient failures
    (HTTP 5xx, timeouts, connection errors) are retried with exponential
    backoff plus jitter, bounded by ``max_retries`` and a per-URL time budget.
    """

    def __init__(
        self,
        endpoint: str,
        policy: FetchPolicy,
        limiter: HostRateLimiter | None = None,
        transport: httpx.AsyncBaseTransport | None = None,
        seed: int = 0,
        sleep=asyncio.sleep,
    ):
        self.endpoint = endpoint
        self.policy = policy
        self.limiter = limiter or HostRateLimiter(policy.min_request_interval_per_host)
        self.rng = random.Random(seed)
        self.sleep = sleep
        self.backoffs: deque[float] = deque(maxlen=START_HISTORY)
        self._client = httpx.AsyncClient(
            transport=transport,
            timeout=policy.timeout,
            follow_redirects=True,
            headers={"User-Agent": USER_AGENT},
        )

    async def __aenter__(self) -> ArchiveClient:
        return self

    async def __aexit__(self, *exc_info) -> None:
        await self.aclose()

    async def aclose(self) -> None:
        await self._client.aclose()

    def backoff_delay(self, attempt: int) -> float:
        """Delay before retry number ``attempt`` (1-based)."""
        base = self.policy.backoff_base * (2 ** (attempt - 1))
        return base * (1 + self.policy.backoff_jitter * self.rng.random())

    async def _get(self, url: str, params: dict | None = None) -> tuple[httpx.Response, int]:
        """GET with politeness gate and transient-failure retries.

        Returns:
            (response, attempts) for the first non-transient response

        Raises:
            TransientExhaustedError: When retries or the per-URL budget run out
        """
        host = httpx.URL(url).host
        started = time.monotonic()
        attempt = 0
        while True:
            attempt += 1
            await self.limiter.acquire(host)
            try:
                response = await self._client.get(url, params=params)
            except (httpx.TimeoutException, httpx.TransportError) as e:
                reason = f"{type(e).__name__}: {e}"
            else:
                if response.status_code < 500:
                    return response, attempt
                reason = f"HTTP {response.status_code}"

            if attempt > self.policy.max_retries:
                raise TransientExhaustedError(url, attempt, reason)
            delay = self.backoff_delay(attempt)
            if time.monotonic() - started + delay > self.policy.per_url_budget:
                raise TransientExhaustedError(url, attempt, f"{reason}; per-URL budget spent")
            logger.warning("Transient archive failure, backing off", url=url, attempt=attempt, delay=round(delay, 3), reason=reason)
            self.backoffs.append(delay)
            await self.sleep(delay)

    async def query_availability(self, url: str, target: str | None = None) -> LookupResult:
        """Ask the availability API for the capture closest to ``target``.

        The API's own "closest" choice is trusted; captures not marked
        available are reported as no snapshot.

        Raises:
            TransientExhaustedError: Retries exhausted (caller defers the URL)
            PermanentFetchError: HTTP 4xx other than 404
        """
        target = target or self.policy.target_timestamp
        response, attempts = await self._get(self.endpoint, params={"url": url, "timestamp": target})
        if response.status_code == 404:
            return LookupResult(None, attempts)
        if response.status_code >= 400:
            raise PermanentFetchError(url, response.status_code, attempts)
        try:
            snapshot = parse_availability(response.json())
        except ValueError as e:
            logger.warning("Unreadable availability response", url=url, error=str(e))
            return LookupResult(None, attempts)
        if snapshot is None or not snapshot.available:
            return LookupResult(None, attempts)
        return LookupResult(snapshot, attempts)

    async def fetch_snapshot(self, snapshot: Snapshot) -> FetchResult:
        """Download the raw archived payload of an available snapshot.

        Raises:
            TransientExhaustedError: Retries exhausted
            PermanentFetchError: Any 4xx response
        """
        if not snapshot.available:
            raise ValueError(f"Snapshot is not available: {snapshot.archive_url}")
        raw_url = raw_archive_url(snapshot.archive_url)
        response, attempts = await self._get(raw_url)
        if response.status_code != 200:
            raise PermanentFetchError(raw_url, response.status_code, attempts)

        payload = response.content
        logger.debug("Snapshot fetched", archive_url=raw_url, bytes=len(payload), attempts=attempts)
        return FetchResult(
            payload=payload,
            content_type=response.headers.get("content-type"),
            charset=response.charset_encoding,
            attempts=attempts,
            fetched_at=datetime.now(UTC).isoformat(timespec="seconds"),
        )
