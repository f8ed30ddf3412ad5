"""Crawl orchestration: lookup, fetch, journal, and mapping emission."""

from __future__ import annotations

import asyncio
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field

from core.logging import get_logger
from core.observability import record_metric
from ingestion.archive_client import (
    ArchiveClient,
    PermanentFetchError,
    Snapshot,
    TransientExhaustedError,
)
from ingestion.crawl_journal import CrawlJournal, Disposition, JournalEntry, resume_crawl
from ingestion.mapping_file import ArchiveMapping, assign_doc_ids
from ingestion.raw_store import RawPayloadMeta, RawStore

logger = get_logger(__name__)


@dataclass(slots=True)
class CrawlSummary:
    """Disposition counts for one crawl run."""

    scheduled: int = 0
    skipped_completed: int = 0
    counts: Counter[str] = field(default_factory=Counter)

    @property
    def deferred(self) -> int:
        return self.counts[Disposition.DEFERRED.value]

    @property
    def fetched(self) -> int:
        return self.counts[Disposition.FETCHED.value]


@dataclass(slots=True)
class RefetchSummary:
    """Outcome of rebuilding raw payloads from a mapping file."""

    fetched: int = 0
    present: int = 0
    deferred: list[str] = field(default_factory=list)
    failed: list[str] = field(default_factory=list)


class Crawler:
    """Resolve, fetch and journal every URL of a universe.

    Work runs on ``max_concurrency`` workers; the journal has a single writer
    (the event loop), and the mapping is a post-pass over the journal so its
    content does not depend on scheduling.
    """

    def __init__(self, client: ArchiveClient, journal: CrawlJournal, raw_store: RawStore):
        self.client = client
        self.journal = journal
        self.raw_store = raw_store
        self.policy = client.policy

    async def crawl_url(self, url: str, doc_id: str) -> JournalEntry:
        """Lookup + fetch one URL and return its disposition (not yet journaled)."""
        try:
            lookup = await self.client.query_availability(url)
        except TransientExhaustedError as e:
            logger.warning("Deferring URL after lookup failures", url=url, attempts=e.attempts)
            return JournalEntry(url, Disposition.DEFERRED, e.attempts)
        except PermanentFetchError as e:
            logger.warning("Permanent lookup failure", url=url, status=e.status_code)
            return JournalEntry(url, Disposition.UNRECOVERABLE, e.attempts)

        snapshot = lookup.snapshot
        if snapshot is None or not snapshot.is_acceptable:
            if snapshot is not None:
                logger.debug("Rejecting capture", url=url, status=snapshot.http_status)
            return JournalEntry(url, Disposition.NO_SNAPSHOT, lookup.attempts)

        try:
            result = await self.client.fetch_snapshot(snapshot)
        except (TransientExhaustedError, PermanentFetchError) as e:
            logger.warning("Snapshot unrecoverable", url=url, error=str(e))
            return JournalEntry(url, Disposition.UNRECOVERABLE, e.attempts)

        self.raw_store.put(
            RawPayloadMeta(
                doc_id=doc_id,
                original_url=url,
                archive_url=snapshot.archive_url,
                timestamp=snapshot.timestamp,
                http_status=snapshot.http_status,
                content_type=result.content_type,
                charset=result.charset,
                byte_length=result.byte_length,
                attempts=result.attempts,
                fetched_at=result.fetched_at,
            ),
            result.payload,
        )
        return JournalEntry(url, Disposition.FETCHED, result.attempts)

    async def run(self, urls: Iterable[str], limit: int | None = None) -> CrawlSummary:
        """Crawl every URL lacking a terminal journal entry.

        Args:
            urls: The full URL universe (doc ids are assigned over all of it)
            limit: Stop after this many URLs (partial runs resume later)
        """
        universe = sorted(set(urls))
        doc_ids = assign_doc_ids(universe)
        plan = resume_crawl(self.journal, universe)
        pending = plan.pending if limit is None else plan.pending[:limit]

        summary = CrawlSummary(scheduled=len(pending), skipped_completed=plan.completed)
        queue: asyncio.Queue[str] = asyncio.Queue()
        for url in pending:
            queue.put_nowait(url)

        async def worker() -> None:
            while True:
                try:
                    url = queue.get_nowait()
                except asyncio.QueueEmpty:
                    return
                entry = await self.crawl_url(url, doc_ids[url])
                self.journal.append(entry)
                summary.counts[entry.disposition.value] += 1

        logger.info("Crawl started", pending=len(pending), completed=plan.completed)
        workers = [asyncio.create_task(worker()) for _ in range(min(self.policy.max_concurrency, max(len(pending), 1)))]
        await asyncio.gather(*workers)

        for disposition, count in sorted(summary.counts.items()):
            record_metric("crawl_disposition", count, disposition=disposition)
        logger.info("Crawl finished", **dict(summary.counts))
        return summary

    async def revalidate(self, rows: Iterable[ArchiveMapping]) -> int:
        """Re-query availability for mapped documents, journaling takedowns as deleted."""
        deleted = 0
        for row in sorted(rows):
            try:
                lookup = await self.client.query_availability(row.original_url)
            except (TransientExhaustedError, PermanentFetchError) as e:
                logger.warning("Revalidation inconclusive", url=row.original_url, error=str(e))
                continue
            if lookup.snapshot is None:
                self.journal.append(JournalEntry(row.original_url, Disposition.DELETED, lookup.attempts))
                deleted += 1
        logger.info("Revalidation finished", deleted=deleted)
        return deleted

    async def refetch(self, rows: Iterable[ArchiveMapping]) -> RefetchSummary:
        """Download raw payloads named by a mapping file (rebuild from a distributed mapping).

        Rows whose payload is already stored are skipped, so an interrupted
        rebuild resumes where it stopped.
        """
        summary = RefetchSummary()
        pending = []
        for row in sorted(rows):
            if self.raw_store.has(row.doc_id):
                summary.present += 1
            else:
                pending.append(row)
        semaphore = asyncio.Semaphore(self.policy.max_concurrency)

        async def fetch(row: ArchiveMapping) -> None:
            snapshot = Snapshot(archive_url=row.archive_url, timestamp=row.timestamp, http_status=200, available=True)
            async with semaphore:
                try:
                    result = await self.client.fetch_snapshot(snapshot)
                except TransientExhaustedError as e:
                    logger.warning("Snapshot fetch deferred", doc_id=row.doc_id, attempts=e.attempts)
                    summary.deferred.append(row.doc_id)
                    return
                except PermanentFetchError as e:
                    logger.warning("Snapshot gone", doc_id=row.doc_id, status=e.status_code)
                    summary.failed.append(row.doc_id)
                    return
            self.raw_store.put(
                RawPayloadMeta(
                    doc_id=row.doc_id,
                    original_url=row.original_url,
                    archive_url=row.archive_url,
                    timestamp=row.timestamp,
                    http_status=200,
                    content_type=result.content_type,
                    charset=result.charset,
                    byte_length=result.byte_length,
                    attempts=result.attempts,
                    fetched_at=result.fetched_at,
                ),
                result.payload,
            )
            summary.fetched += 1

        await asyncio.gather(*(fetch(row) for row in pending))
        summary.deferred.sort()
        summary.failed.sort()
        record_metric("refetch_deferred", len(summary.deferred))
        logger.info(
            "Refetch finished",
            fetched=summary.fetched,
            present=summary.present,
            deferred=len(summary.deferred),
            failed=len(summary.failed),
        )
        return summary

    def emit_mapping(self, urls: Iterable[str]) -> list[ArchiveMapping]:
        """Build mapping rows for every URL whose latest disposition is fetched."""
        return emit_mapping(self.journal, self.raw_store, urls)


def emit_mapping(journal: CrawlJournal, raw_store: RawStore, urls: Iterable[str]) -> list[ArchiveMapping]:
    """Deterministic post-pass from journal + raw metadata to mapping rows."""
    universe = sorted(set(urls))
    doc_ids = assign_doc_ids(universe)
    latest = journal.dispositions()
    rows: list[ArchiveMapping] = []
    for url in universe:
        entry = latest.get(url)
        if entry is None or entry.disposition is not Disposition.FETCHED:
            continue
        meta = raw_store.get_meta(doc_ids[url])
        if meta.http_status != 200:
            continue
        rows.append(ArchiveMapping(doc_ids[url], url, meta.timestamp, meta.archive_url))
    return rows
