"""Session segmentation, filtering, date splits and the session dataset file."""

from __future__ import annotations

from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from datetime import UTC, date, datetime
from pathlib import Path

from pydantic import BaseModel, ConfigDict, model_validator

from brain.schemas import SplitStatistics
from core.errors import DataError, SessionOrderError, SplitSpecError, UrlError
from core.logging import get_logger
from core.observability import record_metric
from ingestion.log_parser import LogRecord, canonicalize_url

logger = get_logger(__name__)

SPLITS = ("train", "dev", "test")
DEFAULT_GAP_SECONDS = 1800.0


@dataclass(frozen=True, slots=True, order=True)
class Click:
    doc_id: str
    item_rank: int | None = None


@dataclass(slots=True)
class SessionQuery:
    """One query of a session with the in-corpus documents clicked for it."""

    query_text: str
    query_time: datetime
    clicks: list[Click] = field(default_factory=list)

    @property
    def clicked_doc_ids(self) -> list[str]:
        return sorted({click.doc_id for click in self.clicks})

    def merge_clicks(self, clicks: Iterable[Click]) -> None:
        seen = set(self.clicks)
        for click in clicks:
            if click not in seen:
                self.clicks.append(click)
                seen.add(click)


@dataclass(slots=True)
class Session:
    session_id: str
    user_id: str
    queries: list[SessionQuery]
    split: str | None = None

    @property
    def start(self) -> datetime:
        return self.queries[0].query_time

    def distinct_queries(self) -> int:
        return len({query.query_text for query in self.queries})

    def query_id(self, query_index: int) -> str:
        return f"{self.session_id}/{query_index}"


class SplitSpec(BaseModel):
    """Half-open date ranges for the train, dev and test splits."""

    model_config = ConfigDict(frozen=True)

    train: tuple[date, date]
    dev: tuple[date, date]
    test: tuple[date, date]

    @model_validator(mode="after")
    def validate_disjoint(self) -> SplitSpec:
        """Ranges must be non-empty and pairwise disjoint."""
        ranges = self.ranges()
        for name, (start, end) in ranges.items():
            if end <= start:
                raise SplitSpecError(f"{name} range is empty: {start}..{end}")
        names = list(ranges)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                (a_start, a_end), (b_start, b_end) = ranges[a], ranges[b]
                if a_start < b_end and b_start < a_end:
                    raise SplitSpecError(f"Split ranges overlap: {a} and {b}")
        return self

    def ranges(self) -> dict[str, tuple[date, date]]:
        return {"train": self.train, "dev": self.dev, "test": self.test}

    def assign(self, instant: datetime) -> str | None:
        day = instant.date()
        for name, (start, end) in self.ranges().items():
            if start <= day < end:
                return name
        return None


@dataclass(slots=True)
class ClickMappingReport:
    records: int = 0
    clicks: int = 0
    clicks_outside_corpus: int = 0


@dataclass(slots=True)
class SplitResult:
    splits: dict[str, list[Session]]
    discarded: int = 0

    def __getitem__(self, split: str) -> list[Session]:
        return self.splits[split]

    def all_sessions(self) -> list[Session]:
        return [session for split in SPLITS for session in self.splits[split]]


def records_to_session_queries(
    records: Iterable[LogRecord],
    doc_ids_by_url: Mapping[str, str],
    report: ClickMappingReport | None = None,
) -> Iterator[tuple[str, SessionQuery]]:
    """Turn log rows into (user_id, SessionQuery) pairs.

    Clicked URLs are resolved to doc ids through the corpus mapping; clicks
    on documents outside the corpus are dropped and counted.
    """
    report = report if report is not None else ClickMappingReport()
    for record in records:
        report.records += 1
        clicks: list[Click] = []
        if record.click_url is not None:
            report.clicks += 1
            try:
                doc_id = doc_ids_by_url.get(canonicalize_url(record.click_url))
            except UrlError:
                doc_id = None
            if doc_id is None:
                report.clicks_outside_corpus += 1
            else:
                clicks.append(Click(doc_id, record.item_rank))
        yield record.user_id, SessionQuery(record.query_text, record.query_time, clicks)


def segment(items: Iterable[tuple[str, SessionQuery]], gap_threshold: float = DEFAULT_GAP_SECONDS) -> list[Session]:
    """Split per-user, time-ordered queries into sessions.

    A new session starts at a record ``gap_threshold`` seconds or more after
    the previous record of the same user. A record repeating the text of the
    session's last query is merged into it: clicks are unioned and the query
    takes the later time, so gaps between kept queries stay under the threshold.

    Raises:
        SessionOrderError: If input is not grouped by user or not time-sorted
    """
    sessions: list[Session] = []
    finished_users: set[str] = set()
    current: Session | None = None
    user_id: str | None = None
    last_time: datetime | None = None
    counter = 0

    for uid, query in items:
        if uid != user_id:
            if uid in finished_users:
                raise SessionOrderError(f"Records for user {uid!r} are not contiguous")
            if user_id is not None:
                finished_users.add(user_id)
            user_id, last_time, counter, current = uid, None, 0, None
        elif last_time is not None and query.query_time < last_time:
            raise SessionOrderError(f"Records for user {uid!r} are not sorted by time")
        previous, last_time = last_time, query.query_time

        if current is None or previous is None or (query.query_time - previous).total_seconds() >= gap_threshold:
            current = Session(f"{uid}:{counter}", uid, [])
            counter += 1
            sessions.append(current)
        elif current.queries[-1].query_text == query.query_text:
            current.queries[-1].merge_clicks(query.clicks)
            current.queries[-1].query_time = query.query_time
            continue
        current.queries.append(SessionQuery(query.query_text, query.query_time, list(query.clicks)))

    record_metric("sessions_segmented", len(sessions))
    return sessions


def filter_sessions(sessions: Iterable[Session], min_queries: int = 2, require_click: bool = False) -> list[Session]:
    """Drop sessions with fewer than ``min_queries`` distinct queries.

    With ``require_click``, queries lacking an in-corpus click are removed
    before the length test.
    """
    kept: list[Session] = []
    dropped = 0
    for session in sessions:
        if require_click:
            session = Session(
                session.session_id,
                session.user_id,
                [query for query in session.queries if query.clicks],
                session.split,
            )
        if session.queries and session.distinct_queries() >= min_queries:
            kept.append(session)
        else:
            dropped += 1
    logger.info("Sessions filtered", kept=len(kept), dropped=dropped, min_queries=min_queries)
    return kept


def split_by_date(sessions: Iterable[Session], spec: SplitSpec) -> SplitResult:
    """Assign each session to a split by the date of its first query."""
    result = SplitResult({split: [] for split in SPLITS})
    for session in sessions:
        split = spec.assign(session.start)
        if split is None:
            result.discarded += 1
            continue
        session.split = split
        result.splits[split].append(session)
    logger.info(
        "Sessions split",
        discarded=result.discarded,
        **{split: len(result.splits[split]) for split in SPLITS},
    )
    return result


def _delta(value: float, base: float) -> float | None:
    return 100.0 * (value - base) / base if base else None


def dataset_stats(
    splits: Mapping[str, list[Session]], baseline: Iterable[SplitStatistics] | None = None
) -> list[SplitStatistics]:
    """Per-split session and query counts, with deltas against a baseline report."""
    base_by_split = {row.split: row for row in baseline or ()}
    rows: list[SplitStatistics] = []
    for split in SPLITS:
        sessions = splits.get(split, [])
        queries = sum(len(session.queries) for session in sessions)
        avg = round(queries / len(sessions), 2) if sessions else 0.0
        row = SplitStatistics(split=split, sessions=len(sessions), queries=queries, avg_queries_per_session=avg)
        base = base_by_split.get(split)
        if base is not None:
            row.sessions_delta_pct = _delta(row.sessions, base.sessions)
            row.queries_delta_pct = _delta(row.queries, base.queries)
            row.avg_delta_pct = _delta(row.avg_queries_per_session, base.avg_queries_per_session)
        rows.append(row)
    return rows


def _epoch(instant: datetime) -> int:
    return int(instant.replace(tzinfo=UTC).timestamp())


def write_sessions(sessions: Iterable[Session], path: Path) -> int:
    """Write one line per query: session, user, split, index, text, epoch seconds, clicked doc ids.

    Returns:
        Number of query lines written
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    lines = 0
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        for session in sessions:
            for index, query in enumerate(session.queries):
                clicks = ",".join(query.clicked_doc_ids)
                f.write(
                    f"{session.session_id}\t{session.user_id}\t{session.split or ''}\t{index}\t"
                    f"{query.query_text}\t{_epoch(query.query_time)}\t{clicks}\n"
                )
                lines += 1
    tmp.replace(path)
    logger.info("Session dataset written", path=str(path), queries=lines)
    return lines


def read_sessions(path: Path) -> list[Session]:
    """Read a session dataset file.

    Raises:
        DataError: On malformed rows or out-of-order query indices
    """
    sessions: list[Session] = []
    with open(path, encoding="utf-8", newline="") as f:
        for line_number, line in enumerate(f, start=1):
            fields = line.rstrip("\n").split("\t")
            if len(fields) != 7:
                raise DataError(f"{path}:{line_number}: expected 7 fields, got {len(fields)}")
            session_id, user_id, split, index_text, query_text, epoch_text, clicks_text = fields
            if not index_text.isdigit() or not epoch_text.lstrip("-").isdigit():
                raise DataError(f"{path}:{line_number}: bad query index or timestamp")
            if split and split not in SPLITS:
                raise DataError(f"{path}:{line_number}: unknown split {split!r}")
            query = SessionQuery(
                query_text,
                datetime.fromtimestamp(int(epoch_text), UTC).replace(tzinfo=None),
                [Click(doc_id) for doc_id in clicks_text.split(",") if doc_id],
            )
            index = int(index_text)
            if index == 0:
                sessions.append(Session(session_id, user_id, [query], split or None))
            elif sessions and sessions[-1].session_id == session_id and len(sessions[-1].queries) == index:
                sessions[-1].queries.append(query)
            else:
                raise DataError(f"{path}:{line_number}: query index {index} out of sequence")
    return sessions
