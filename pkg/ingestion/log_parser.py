"""Query-log parsing and URL canonicalization."""

from __future__ import annotations

import gzip
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from urllib.parse import urlsplit, urlunsplit

from core.errors import LogParseError, UrlError
from core.logging import get_logger
from core.observability import record_metric

logger = get_logger(__name__)

LOG_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"
HEADER_PREFIX = "AnonID\t"
GZIP_MAGIC = b"\x1f\x8b"


@dataclass(frozen=True, slots=True)
class LogRecord:
    """One parsed click-log row."""

    user_id: str
    query_text: str
    query_time: datetime
    item_rank: int | None = None
    click_url: str | None = None

    def __post_init__(self) -> None:
        if (self.item_rank is None) != (self.click_url is None):
            raise ValueError("item_rank and click_url must be both present or both absent")

    @property
    def has_click(self) -> bool:
        return self.click_url is not None

    def to_line(self) -> str:
        """Serialize back to the five-column log layout."""
        rank = "" if self.item_rank is None else str(self.item_rank)
        url = self.click_url or ""
        return "\t".join(
            [self.user_id, self.query_text, self.query_time.strftime(LOG_TIME_FORMAT), rank, url]
        )


@dataclass(slots=True)
class LogReadReport:
    """Counters for one pass over one or more log files."""

    lines: int = 0
    records: int = 0
    skipped: int = 0
    errors: list[LogParseError] = field(default_factory=list)

    @property
    def error_count(self) -> int:
        return len(self.errors)


def parse_log_line(line: str, line_number: int | None = None) -> LogRecord | None:
    """Parse one tab-separated query-log row.

    Args:
        line: Raw line (trailing newline allowed)
        line_number: 1-based line number used in error messages

    Returns:
        LogRecord, or None for header and blank lines

    Raises:
        LogParseError: If the row has the wrong shape, a bad timestamp or a bad rank
    """
    line = line.rstrip("\r\n")
    if not line.strip() or line.startswith(HEADER_PREFIX):
        return None

    fields = line.split("\t")
    if len(fields) == 3:
        fields += ["", ""]
    if len(fields) != 5:
        raise LogParseError(f"expected 3 or 5 tab-separated fields, got {len(fields)}", line_number)

    user_id, query_text, time_text, rank_text, url = fields
    try:
        query_time = datetime.strptime(time_text, LOG_TIME_FORMAT)
    except ValueError as e:
        raise LogParseError(f"malformed timestamp {time_text!r}", line_number) from e

    rank_text = rank_text.strip()
    url = url.strip()
    if not rank_text and not url:
        return LogRecord(user_id=user_id, query_text=query_text, query_time=query_time)
    if not rank_text or not url:
        raise LogParseError("item rank and click URL must be both present or both absent", line_number)

    try:
        item_rank = int(rank_text)
    except ValueError as e:
        raise LogParseError(f"non-integer item rank {rank_text!r}", line_number) from e
    if item_rank < 1:
        raise LogParseError(f"item rank must be positive, got {item_rank}", line_number)

    return LogRecord(
        user_id=user_id,
        query_text=query_text,
        query_time=query_time,
        item_rank=item_rank,
        click_url=url,
    )


def open_log_file(path: Path):
    """Open a log file as text, transparently handling gzip."""
    with open(path, "rb") as f:
        magic = f.read(2)
    if magic == GZIP_MAGIC:
        return gzip.open(path, "rt", encoding="utf-8", errors="replace", newline="")
    return open(path, encoding="utf-8", errors="replace", newline="")


def read_log_files(paths: Iterable[Path], report: LogReadReport | None = None) -> Iterator[LogRecord]:
    """Stream records from log files, counting malformed lines instead of failing.

    Args:
        paths: Log files in reading order
        report: Optional report to accumulate counters into

    Yields:
        Parsed records
    """
    report = report if report is not None else LogReadReport()
    for path in paths:
        logger.info("Reading query log", path=str(path))
        with open_log_file(path) as f:
            for line_number, line in enumerate(f, start=1):
                report.lines += 1
                try:
                    record = parse_log_line(line, line_number)
                except LogParseError as e:
                    e.source = str(path)
                    report.errors.append(e)
                    logger.warning("Skipping malformed log line", path=str(path), line=line_number, error=str(e))
                    continue
                if record is None:
                    report.skipped += 1
                    continue
                report.records += 1
                yield record

    record_metric("log_parse_errors", report.error_count)


def canonicalize_url(url: str) -> str:
    """Canonicalize a clicked URL for archive lookup.

    Scheme and host are lowercased, the fragment dropped and a bare "/" path
    removed. Percent-encoding, "www." and the scheme itself are kept as-is.

    Raises:
        UrlError: If the URL is empty, has no scheme or cannot be split
    """
    if not url or not url.strip():
        raise UrlError(url, "empty URL")
    url = url.strip()
    try:
        parts = urlsplit(url)
        _ = parts.port  # raises on a malformed port
    except ValueError as e:
        raise UrlError(url, str(e)) from e
    if not parts.scheme:
        raise UrlError(url, "missing scheme")

    netloc = parts.netloc
    userinfo, at, hostport = netloc.rpartition("@")
    netloc = f"{userinfo}{at}{hostport.lower()}"

    path = parts.path
    if path == "/" and not parts.query:
        path = ""

    return urlunsplit((parts.scheme.lower(), netloc, path, parts.query, ""))


def is_homepage(url: str) -> bool:
    """True when the URL has an empty (or "/") path and no query string."""
    parts = urlsplit(url)
    return parts.path in ("", "/") and not parts.query
