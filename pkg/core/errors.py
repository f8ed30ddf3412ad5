"""Exception hierarchy shared by every pipeline stage.

Each error carries the process exit code the command-line entry point returns
for it: 1 for usage errors, 2 for data errors, 3 when archive requests are
exhausted.
"""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path


class PipelineError(Exception):
    """Base class for all pipeline failures."""

    exit_code = 2


class UsageError(PipelineError):
    """Bad flags, configuration values or command ordering."""

    exit_code = 1


class DataError(PipelineError):
    """Input or artifact content is invalid."""

    exit_code = 2


class NetworkExhaustedError(PipelineError):
    """Archive requests kept failing after the retry budget."""

    exit_code = 3


class LogParseError(DataError):
    """A query-log line could not be parsed."""

    def __init__(self, message: str, line_number: int | None = None, source: str | None = None):
        self.line_number = line_number
        self.source = source
        location = ""
        if source:
            location = f"{source}:"
        if line_number is not None:
            location = f"{location}{line_number}: "
        elif location:
            location = f"{location} "
        super().__init__(f"{location}{message}")


class UrlError(DataError):
    """A URL could not be parsed or canonicalized."""

    def __init__(self, url: str, reason: str):
        self.url = url
        super().__init__(f"Cannot canonicalize URL {url!r}: {reason}")


class MappingFormatError(DataError):
    """A mapping-file row is malformed."""

    def __init__(self, message: str, line_number: int):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class DuplicateDocIdError(DataError):
    """Two rows share a document id."""

    def __init__(self, doc_id: str, urls: Iterable[str]):
        self.doc_id = doc_id
        self.urls = sorted(urls)
        super().__init__(f"Duplicate doc_id {doc_id} for URLs: {', '.join(self.urls)}")


class JournalCorruptedError(DataError):
    """A crawl-journal entry failed its checksum before the final line."""

    def __init__(self, path: Path, line_number: int):
        self.path = path
        self.line_number = line_number
        super().__init__(f"Corrupted crawl journal {path} at line {line_number}")


class ExtractionError(DataError):
    """HTML could not be turned into text."""


class DocumentNotFoundError(LookupError):
    """A document id is absent from the store (not an I/O failure)."""

    def __init__(self, doc_id: str):
        self.doc_id = doc_id
        super().__init__(f"Document not found: {doc_id}")


class IndexFormatError(DataError):
    """A persisted index file has a bad header or truncated body."""


class RunFormatError(DataError):
    """A run or qrels row is malformed."""

    def __init__(self, message: str, line_number: int):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class SessionOrderError(DataError):
    """Records handed to segmentation are not grouped by user and time-sorted."""


class SplitSpecError(UsageError):
    """Split date ranges overlap."""


class QueryMismatchError(DataError):
    """Two systems or a run and its qrels do not cover the same queries."""

    def __init__(self, message: str, query_ids: Iterable[str] = ()):
        self.query_ids = sorted(query_ids)
        if self.query_ids:
            shown = ", ".join(self.query_ids[:20])
            more = "" if len(self.query_ids) <= 20 else f" (+{len(self.query_ids) - 20} more)"
            message = f"{message}: {shown}{more}"
        super().__init__(message)


class ProfileError(DataError):
    """A language profile cannot be trained or read."""


class MissingArtifactError(DataError):
    """An upstream stage output is missing."""

    def __init__(self, path: Path, producer: str):
        self.path = path
        self.producer = producer
        super().__init__(f"Expected {path}; run `{producer}` first")
