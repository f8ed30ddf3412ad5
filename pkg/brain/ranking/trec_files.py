"""Run and qrels files in the standard whitespace-separated layouts."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from core.errors import RunFormatError
from core.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True, slots=True)
class RunEntry:
    query_id: str
    doc_id: str
    rank: int
    score: float
    tag: str

    def to_line(self) -> str:
        return f"{self.query_id} Q0 {self.doc_id} {self.rank} {self.score:.6g} {self.tag}\n"


@dataclass(frozen=True, slots=True)
class QrelEntry:
    query_id: str
    doc_id: str
    relevance: int

    def to_line(self) -> str:
        return f"{self.query_id} 0 {self.doc_id} {self.relevance}\n"


def _write_lines(lines: Iterable[str], path: Path) -> int:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    count = 0
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        for line in lines:
            f.write(line)
            count += 1
    tmp.replace(path)
    return count


def write_run(entries: Iterable[RunEntry], path: Path) -> int:
    """Write ``qid Q0 docid rank score tag`` rows in the given order."""
    count = _write_lines((entry.to_line() for entry in entries), path)
    logger.info("Run written", path=str(path), rows=count)
    return count


def read_run(path: Path) -> list[RunEntry]:
    """Read a run file.

    Raises:
        RunFormatError: On a row without six fields, a bad rank or a bad score
    """
    entries: list[RunEntry] = []
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 6:
                raise RunFormatError(f"expected 6 fields, got {len(fields)}", line_number)
            query_id, _, doc_id, rank_text, score_text, tag = fields
            try:
                rank = int(rank_text)
                score = float(score_text)
            except ValueError as e:
                raise RunFormatError(str(e), line_number) from e
            if rank < 1:
                raise RunFormatError(f"rank must be positive, got {rank}", line_number)
            entries.append(RunEntry(query_id, doc_id, rank, score, tag))
    return entries


def write_qrels(entries: Iterable[QrelEntry], path: Path) -> int:
    """Write ``qid 0 docid rel`` rows in the given order."""
    count = _write_lines((entry.to_line() for entry in entries), path)
    logger.info("Qrels written", path=str(path), rows=count)
    return count


def read_qrels(path: Path) -> list[QrelEntry]:
    """Read a qrels file.

    Raises:
        RunFormatError: On a malformed row or a repeated (query, document) pair
    """
    entries: list[QrelEntry] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            fields = line.split()
            if len(fields) != 4:
                raise RunFormatError(f"expected 4 fields, got {len(fields)}", line_number)
            query_id, _, doc_id, rel_text = fields
            try:
                relevance = int(rel_text)
            except ValueError as e:
                raise RunFormatError(str(e), line_number) from e
            if relevance < 0:
                raise RunFormatError(f"relevance must be non-negative, got {relevance}", line_number)
            if (query_id, doc_id) in seen:
                raise RunFormatError(f"duplicate judgment for {query_id} {doc_id}", line_number)
            seen.add((query_id, doc_id))
            entries.append(QrelEntry(query_id, doc_id, relevance))
    return entries
