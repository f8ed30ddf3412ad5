"""Append-only crawl journal with per-line checksums.

Each line is ``url \\t disposition \\t attempts \\t checksum`` where the
checksum is the CRC-32 of the first three fields. A crash can leave at most a
truncated final line, which is dropped on read so its URL is crawled again.
The first append of a run cuts such a line off before writing.
"""

from __future__ import annotations

import os
import zlib
from collections.abc import Iterable
from dataclasses import dataclass
from enum import StrEnum
from pathlib import Path

from core.errors import JournalCorruptedError
from core.logging import get_logger

logger = get_logger(__name__)

_TAIL_CHUNK = 4096


class Disposition(StrEnum):
    FETCHED = "fetched"
    NO_SNAPSHOT = "no_snapshot"
    UNRECOVERABLE = "unrecoverable"
    DEFERRED = "deferred"
    DELETED = "deleted"


TERMINAL_DISPOSITIONS = frozenset(
    {Disposition.FETCHED, Disposition.NO_SNAPSHOT, Disposition.UNRECOVERABLE, Disposition.DELETED}
)


def line_checksum(url: str, disposition: str, attempts: int) -> str:
    payload = f"{url}\t{disposition}\t{attempts}".encode()
    return f"{zlib.crc32(payload):08x}"


@dataclass(frozen=True, slots=True)
class JournalEntry:
    url: str
    disposition: Disposition
    attempts: int

    @property
    def is_terminal(self) -> bool:
        return self.disposition in TERMINAL_DISPOSITIONS

    def to_line(self) -> str:
        checksum = line_checksum(self.url, self.disposition.value, self.attempts)
        return f"{self.url}\t{self.disposition.value}\t{self.attempts}\t{checksum}\n"


@dataclass(frozen=True, slots=True)
class CrawlPlan:
    """URLs still lacking a terminal disposition."""

    pending: list[str]
    completed: int

    def __len__(self) -> int:
        return len(self.pending)


class CrawlJournal:
    """Single-writer append-only journal file."""

    def __init__(self, path: Path, fsync: bool = False):
        self.path = path
        self.fsync = fsync
        self._tail_repaired = False

    def append(self, entry: JournalEntry) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if not self._tail_repaired:
            self.repair_tail()
        with open(self.path, "a", encoding="utf-8", newline="\n") as f:
            f.write(entry.to_line())
            f.flush()
            if self.fsync:
                os.fsync(f.fileno())

    def repair_tail(self) -> int:
        """Truncate the file back to its last newline; returns the bytes removed."""
        self._tail_repaired = True
        if not self.path.exists():
            return 0
        with open(self.path, "rb+") as f:
            size = f.seek(0, os.SEEK_END)
            end = size
            while end > 0:
                start = max(0, end - _TAIL_CHUNK)
                f.seek(start)
                newline = f.read(end - start).rfind(b"\n")
                if newline >= 0:
                    end = start + newline + 1
                    break
                end = start
            if end == size:
                return 0
            f.truncate(end)
        logger.warning("Cut torn final journal line", path=str(self.path), removed_bytes=size - end)
        return size - end

    def entries(self) -> list[JournalEntry]:
        """Read all valid entries in order.

        Raises:
            JournalCorruptedError: If any line other than the last fails validation
        """
        if not self.path.exists():
            return []
        with open(self.path, encoding="utf-8", errors="replace", newline="") as f:
            lines = f.readlines()

        entries: list[JournalEntry] = []
        for line_number, line in enumerate(lines, start=1):
            is_last = line_number == len(lines)
            entry = _parse_line(line)
            if entry is None:
                if is_last:
                    logger.warning("Dropping truncated final journal line", path=str(self.path), line=line_number)
                    break
                raise JournalCorruptedError(self.path, line_number)
            entries.append(entry)
        return entries

    def dispositions(self) -> dict[str, JournalEntry]:
        """Latest entry per URL."""
        latest: dict[str, JournalEntry] = {}
        for entry in self.entries():
            latest[entry.url] = entry
        return latest


def _parse_line(line: str) -> JournalEntry | None:
    if not line.endswith("\n"):
        return None
    fields = line[:-1].split("\t")
    if len(fields) != 4:
        return None
    url, disposition, attempts_text, checksum = fields
    if not attempts_text.isdigit():
        return None
    if line_checksum(url, disposition, int(attempts_text)) != checksum:
        return None
    try:
        return JournalEntry(url, Disposition(disposition), int(attempts_text))
    except ValueError:
        return None


def resume_crawl(journal: CrawlJournal, urls: Iterable[str]) -> CrawlPlan:
    """Return the universe URLs with no terminal disposition, in sorted order.

    Completed work (fetched, no snapshot, unrecoverable, deleted) is never
    scheduled again; deferred URLs are.
    """
    latest = journal.dispositions()
    pending: list[str] = []
    completed = 0
    for url in sorted(set(urls)):
        entry = latest.get(url)
        if entry is not None and entry.is_terminal:
            completed += 1
        else:
            pending.append(url)
    logger.info("Crawl plan computed", pending=len(pending), completed=completed)
    return CrawlPlan(pending=pending, completed=completed)
