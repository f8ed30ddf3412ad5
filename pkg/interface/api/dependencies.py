"""Shared state of the mock archive service."""

from __future__ import annotations

import time
from collections import Counter, defaultdict
from dataclasses import dataclass

from fastapi import Request

from core.config import DEFAULT_TARGET_TIMESTAMP, parse_timestamp14
from interface.api.schemas import ArchiveFixture, Capture


@dataclass(frozen=True, slots=True)
class RequestRecord:
    at: float
    host: str
    path: str
    kind: str


class ArchiveState:
    """Captures by URL, remaining scripted failures and the request log."""

    def __init__(self, fixture: ArchiveFixture, clock=time.monotonic):
        self.fixture = fixture
        self.clock = clock
        self.request_log: list[RequestRecord] = []
        self.captures: dict[str, list[Capture]] = defaultdict(list)
        for capture in fixture.captures:
            self.captures[capture.url].append(capture)
        self._failures_left: dict[str, Counter] = {
            "lookup": Counter(fixture.lookup_failures),
            "fetch": Counter(fixture.fetch_failures),
        }

    def log_request(self, request: Request, kind: str) -> None:
        host = request.headers.get("host", request.url.hostname or "")
        self.request_log.append(RequestRecord(self.clock(), host, request.url.path, kind))

    def take_failure(self, kind: str, url: str) -> bool:
        """Consume one scripted transient failure for ``url`` if any remain."""
        left = self._failures_left[kind]
        if left[url] > 0:
            left[url] -= 1
            return True
        return False

    def closest(self, url: str, target: str | None) -> Capture | None:
        """Capture nearest to ``target``; a capture flagged ``closest`` always wins."""
        captures = self.captures.get(url)
        if not captures:
            return None
        forced = [c for c in captures if c.closest]
        if forced:
            return forced[0]
        wanted = parse_timestamp14(target or DEFAULT_TARGET_TIMESTAMP)
        return min(
            captures,
            key=lambda c: (abs((parse_timestamp14(c.timestamp) - wanted).total_seconds()), c.timestamp),
        )

    def find(self, url: str, timestamp: str) -> Capture | None:
        return next((c for c in self.captures.get(url, ()) if c.timestamp == timestamp), None)

    def requests_by_host(self) -> dict[str, list[float]]:
        starts: dict[str, list[float]] = defaultdict(list)
        for record in self.request_log:
            starts[record.host].append(record.at)
        return dict(starts)


def get_archive_state(request: Request) -> ArchiveState:
    """Resolve the state attached to the running app."""
    return request.app.state.archive
