"""Unit tests for the archive client against the mock archive service."""

import httpx
import pytest

from ingestion.archive_client import (
    ArchiveClient,
    FetchPolicy,
    PermanentFetchError,
    Snapshot,
    TransientExhaustedError,
    parse_availability,
    raw_archive_url,
)
from ingestion.rate_limiter import START_HISTORY
from interface.api.main import create_app
from interface.api.schemas import ArchiveFixture, Capture

ENDPOINT = "http://archive.test/wayback/available"
URL = "http://www.example.com"
HTML = "<html><head><title>Example</title></head><body>Hello</body></html>"


def _client(fixture: ArchiveFixture, **policy) -> tuple[ArchiveClient, list[float]]:
    slept: list[float] = []

    async def sleep(delay: float) -> None:
        slept.append(delay)

    settings = {"min_request_interval_per_host": 0.0, "backoff_base": 0.5, "max_retries": 3, **policy}
    transport = httpx.ASGITransport(app=create_app(fixture))
    client = ArchiveClient(ENDPOINT, FetchPolicy(**settings), transport=transport, seed=42, sleep=sleep)
    return client, slept


def test_raw_archive_url():
    """Test rewriting archive URLs to their raw-content form."""
    assert (
        raw_archive_url("http://web.archive.org/web/20060215120000/http://www.example.com/")
        == "http://web.archive.org/web/20060215120000id_/http://www.example.com/"
    )
    assert (
        raw_archive_url("http://web.archive.org/web/20060215120000im_/http://www.example.com/logo.gif")
        == "http://web.archive.org/web/20060215120000id_/http://www.example.com/logo.gif"
    )
    # already raw
    raw = "http://web.archive.org/web/20060215120000id_/http://www.example.com"
    assert raw_archive_url(raw) == raw


def test_parse_availability():
    payload = {
        "url": URL,
        "archived_snapshots": {
            "closest": {
                "status": "200",
                "available": True,
                "url": "http://web.archive.org/web/20060215120000/http://www.example.com",
                "timestamp": "20060215120000",
            }
        },
    }
    snapshot = parse_availability(payload)
    assert snapshot.timestamp == "20060215120000"
    assert snapshot.http_status == 200
    assert snapshot.is_acceptable
    assert parse_availability({"url": URL, "archived_snapshots": {}}) is None
    assert parse_availability({}) is None


def test_redirect_capture_is_not_acceptable():
    snapshot = Snapshot(archive_url="http://a/web/20060215120000/x", timestamp="20060215120000", http_status=302, available=True)
    assert not snapshot.is_acceptable


def test_backoff_grows_exponentially():
    client, _ = _client(ArchiveFixture(), backoff_base=1.0, backoff_jitter=0.25)
    for attempt in (1, 2, 3):
        delay = client.backoff_delay(attempt)
        assert 2 ** (attempt - 1) <= delay <= 1.25 * 2 ** (attempt - 1)


async def test_closest_snapshot_is_passed_through():
    """Test that the capture the API calls closest is used as-is."""
    fixture = ArchiveFixture(
        captures=[
            Capture(url=URL, timestamp="20050101000000", body=HTML),
            Capture(url=URL, timestamp="20060220000000", body=HTML),
            Capture(url=URL, timestamp="20060901000000", body=HTML),
        ]
    )
    client, _ = _client(fixture)
    async with client:
        lookup = await client.query_availability(URL)
    assert lookup.snapshot.timestamp == "20060220000000"
    assert lookup.attempts == 1

    fixture.captures.append(Capture(url=URL, timestamp="20010101000000", body=HTML, closest=True))
    client, _ = _client(fixture)
    async with client:
        lookup = await client.query_availability(URL)
    assert lookup.snapshot.timestamp == "20010101000000"


async def test_no_snapshot():
    client, _ = _client(ArchiveFixture())
    async with client:
        lookup = await client.query_availability(URL)
    assert lookup.snapshot is None


async def test_transient_failures_are_retried():
    """Test two 503 answers cost two backoffs and three attempts."""
    fixture = ArchiveFixture(captures=[Capture(url=URL, timestamp="20060215120000", body=HTML)], lookup_failures={URL: 2})
    client, slept = _client(fixture)
    async with client:
        lookup = await client.query_availability(URL)
    assert lookup.attempts == 3
    assert lookup.snapshot is not None
    assert len(slept) == 2
    assert slept == list(client.backoffs)
    assert client.backoffs.maxlen == START_HISTORY
    assert slept[1] > slept[0]


async def test_retries_exhausted():
    fixture = ArchiveFixture(lookup_failures={URL: 10})
    client, slept = _client(fixture, max_retries=3)
    async with client:
        with pytest.raises(TransientExhaustedError) as exc_info:
            await client.query_availability(URL)
    assert exc_info.value.attempts == 4
    assert exc_info.value.exit_code == 3
    assert len(slept) == 3


async def test_per_url_budget_stops_retries():
    fixture = ArchiveFixture(lookup_failures={URL: 10})
    client, slept = _client(fixture, backoff_base=100.0, per_url_budget=10.0)
    async with client:
        with pytest.raises(TransientExhaustedError, match="budget"):
            await client.query_availability(URL)
    assert slept == []


async def test_permanent_lookup_error():
    client, _ = _client(ArchiveFixture(lookup_errors={URL: 403}))
    async with client:
        with pytest.raises(PermanentFetchError) as exc_info:
            await client.query_availability(URL)
    assert exc_info.value.status_code == 403
    assert exc_info.value.attempts == 1


async def test_fetch_snapshot_returns_raw_bytes():
    """Test that the raw payload, content type and charset come back unchanged."""
    body = "<html><head><title>Café</title></head><body>Grüße</body></html>"
    fixture = ArchiveFixture(
        captures=[
            Capture(
                url=URL,
                timestamp="20060215120000",
                body=body,
                body_encoding="iso-8859-1",
                content_type="text/html; charset=iso-8859-1",
            )
        ],
        fetch_failures={URL: 1},
    )
    client, slept = _client(fixture)
    async with client:
        lookup = await client.query_availability(URL)
        result = await client.fetch_snapshot(lookup.snapshot)
    assert result.payload == body.encode("iso-8859-1")
    assert result.byte_length == len(result.payload)
    assert result.charset == "iso-8859-1"
    assert result.attempts == 2
    assert len(slept) == 1


async def test_fetch_missing_capture_is_permanent():
    snapshot = Snapshot(
        archive_url=f"http://archive.test/web/20060215120000/{URL}",
        timestamp="20060215120000",
        http_status=200,
        available=True,
    )
    client, _ = _client(ArchiveFixture())
    async with client:
        with pytest.raises(PermanentFetchError) as exc_info:
            await client.fetch_snapshot(snapshot)
    assert exc_info.value.status_code == 404


async def test_requests_respect_host_interval():
    """Test politeness in the client's own timings and in the server's request log."""
    urls = [f"http://site{i}.org" for i in range(5)]
    fixture = ArchiveFixture(captures=[Capture(url=url, timestamp="20060215120000", body=HTML) for url in urls])
    app = create_app(fixture)
    policy = FetchPolicy(min_request_interval_per_host=0.05, max_concurrency=4)
    async with ArchiveClient(ENDPOINT, policy, transport=httpx.ASGITransport(app=app)) as client:
        for url in urls:
            await client.query_availability(url)

    starts = list(client.limiter.starts["archive.test"])
    assert len(starts) == 5
    assert all(b - a >= 0.05 - 1e-3 for a, b in zip(starts, starts[1:], strict=False))

    served = app.state.archive.requests_by_host()["archive.test"]
    assert len(served) == 5
    # server-side arrival times include scheduling jitter
    assert all(b - a >= 0.04 for a, b in zip(served, served[1:], strict=False))
