"""Durable doc-id to archive-snapshot mapping file.

The mapping is the distributable artifact: it lets anyone refetch exactly the
same archived versions without redistributing page content. Rows are written
sorted by doc_id into a gzip container with a fixed header, so repeated writes
are byte-identical.
"""

from __future__ import annotations

import gzip
import hashlib
import io
from collections import Counter, defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from datetime import date
from pathlib import Path

from pydantic import BaseModel

from core.config import parse_timestamp14
from core.errors import DuplicateDocIdError, MappingFormatError
from core.logging import get_logger

logger = get_logger(__name__)

DOC_ID_LENGTH = 12
GZIP_LEVEL = 9

# The query log covers March-May 2006; pages from the preceding quarter count as contemporary
LOG_WINDOW = (date(2006, 1, 1), date(2006, 6, 1))


@dataclass(frozen=True, slots=True, order=True)
class ArchiveMapping:
    """One mapping row: doc_id -> (original URL, snapshot timestamp, archive URL)."""

    doc_id: str
    original_url: str
    timestamp: str
    archive_url: str

    def to_row(self) -> str:
        return f"{self.doc_id}\t{self.original_url}\t{self.timestamp}\t{self.archive_url}\n"


class CollisionReport(BaseModel):
    """Outcome of the doc-id collision audit."""

    url_count: int
    collisions: dict[str, list[str]]
    expected_collisions: float

    @property
    def has_collisions(self) -> bool:
        return bool(self.collisions)


class SnapshotDateReport(BaseModel):
    """Distribution of archive dates across a mapping."""

    total: int
    by_month: dict[str, int]
    log_window_fraction: float
    before_2006_fraction: float
    before_2007_fraction: float


def assign_doc_id(url: str) -> str:
    """First 12 lowercase hex digits of the MD5 digest of the URL's UTF-8 bytes."""
    if not url:
        raise ValueError("Cannot assign a doc_id to an empty URL")
    return hashlib.md5(url.encode("utf-8")).hexdigest()[:DOC_ID_LENGTH]


def audit_doc_ids(urls: Iterable[str]) -> CollisionReport:
    """Exhaustively check a URL set for truncated-digest collisions."""
    by_id: dict[str, list[str]] = defaultdict(list)
    for url in urls:
        by_id[assign_doc_id(url)].append(url)
    n = sum(len(group) for group in by_id.values())
    collisions = {doc_id: sorted(group) for doc_id, group in sorted(by_id.items()) if len(group) > 1}
    report = CollisionReport(
        url_count=n,
        collisions=collisions,
        expected_collisions=n * n / 2 / 16**DOC_ID_LENGTH,
    )
    if collisions:
        logger.warning("doc_id collisions found", count=len(collisions))
    return report


def assign_doc_ids(urls: Iterable[str]) -> dict[str, str]:
    """Map URLs to doc_ids, using the full digest only for colliding URLs."""
    urls = sorted(set(urls))
    report = audit_doc_ids(urls)
    colliding = {url for group in report.collisions.values() for url in group}
    return {
        url: hashlib.md5(url.encode("utf-8")).hexdigest() if url in colliding else assign_doc_id(url)
        for url in urls
    }


def write_mapping(rows: Iterable[ArchiveMapping], path: Path) -> int:
    """Write a gzip-compressed, doc_id-sorted mapping file.

    Returns:
        Number of rows written

    Raises:
        DuplicateDocIdError: If two distinct rows share a doc_id
    """
    by_id: dict[str, ArchiveMapping] = {}
    for row in rows:
        existing = by_id.get(row.doc_id)
        if existing is not None and existing != row:
            raise DuplicateDocIdError(row.doc_id, [existing.original_url, row.original_url])
        by_id[row.doc_id] = row

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp_path = path.with_name(path.name + ".tmp")
    with open(tmp_path, "wb") as raw:
        # empty filename and zero mtime keep the gzip header stable across runs
        with gzip.GzipFile(filename="", mode="wb", fileobj=raw, compresslevel=GZIP_LEVEL, mtime=0) as gz:
            with io.TextIOWrapper(gz, encoding="utf-8", newline="\n") as f:
                for doc_id in sorted(by_id, key=lambda d: d.encode("utf-8")):
                    f.write(by_id[doc_id].to_row())
    tmp_path.replace(path)

    logger.info("Mapping written", path=str(path), rows=len(by_id))
    return len(by_id)


def read_mapping(path: Path) -> set[ArchiveMapping]:
    """Read a mapping file.

    Raises:
        MappingFormatError: On a malformed row (with its line number)
        DuplicateDocIdError: If a doc_id repeats
    """
    rows: dict[str, ArchiveMapping] = {}
    with gzip.open(path, "rt", encoding="utf-8", newline="") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise MappingFormatError(f"expected 4 fields, got {len(fields)}", line_number)
            doc_id, original_url, timestamp, archive_url = fields
            try:
                parse_timestamp14(timestamp)
            except ValueError as e:
                raise MappingFormatError(str(e), line_number) from e
            if not doc_id or not original_url or not archive_url:
                raise MappingFormatError("empty field", line_number)
            if doc_id in rows:
                raise DuplicateDocIdError(doc_id, [rows[doc_id].original_url, original_url])
            rows[doc_id] = ArchiveMapping(doc_id, original_url, timestamp, archive_url)
    return set(rows.values())


def mapping_by_url(rows: Iterable[ArchiveMapping]) -> dict[str, ArchiveMapping]:
    return {row.original_url: row for row in rows}


def snapshot_date_distribution(rows: Iterable[ArchiveMapping]) -> SnapshotDateReport:
    """Histogram snapshot dates by month with the contemporaneity fractions."""
    months: Counter[str] = Counter()
    in_window = before_2006 = before_2007 = total = 0
    for row in rows:
        instant = parse_timestamp14(row.timestamp).date()
        months[instant.strftime("%Y-%m")] += 1
        total += 1
        if LOG_WINDOW[0] <= instant < LOG_WINDOW[1]:
            in_window += 1
        if instant.year < 2006:
            before_2006 += 1
        if instant.year < 2007:
            before_2007 += 1

    def fraction(count: int) -> float:
        return count / total if total else 0.0

    return SnapshotDateReport(
        total=total,
        by_month=dict(sorted(months.items())),
        log_window_fraction=fraction(in_window),
        before_2006_fraction=fraction(before_2006),
        before_2007_fraction=fraction(before_2007),
    )
