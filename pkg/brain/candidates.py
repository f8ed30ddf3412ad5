"""Candidate sets and click-derived judgments for session queries."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

from brain.ranking.bm25 import Bm25Params, rerank, retrieve
from brain.ranking.index import InvertedIndex
from brain.ranking.trec_files import QrelEntry, RunEntry
from brain.session_builder import Session
from brain.tokenizer import tokenize
from core.logging import get_logger
from core.observability import record_metric

logger = get_logger(__name__)

CANDIDATE_TAG = "candidates"


@dataclass(slots=True)
class CandidateSet:
    query_id: str
    run: list[RunEntry]
    qrels: list[QrelEntry]
    forced: int = 0

    @property
    def doc_ids(self) -> list[str]:
        return [entry.doc_id for entry in self.run]


@dataclass(slots=True)
class CandidateReport:
    queries: int = 0
    skipped: int = 0
    forced: int = 0
    clicks_not_indexed: int = 0
    candidate_sets: list[CandidateSet] = field(default_factory=list)

    @property
    def run(self) -> list[RunEntry]:
        return [entry for cs in self.candidate_sets for entry in cs.run]

    @property
    def qrels(self) -> list[QrelEntry]:
        return [qrel for cs in self.candidate_sets for qrel in cs.qrels]


def build_candidates(
    query_id: str,
    query: list[str],
    index: InvertedIndex,
    clicked_doc_ids: Iterable[str],
    k: int,
    params: Bm25Params,
) -> CandidateSet | None:
    """Top-``k`` BM25 documents plus every clicked document.

    Clicked documents are judged 1, all other candidates 0.

    Returns:
        None when nothing matches and nothing was clicked
    """
    if k < 1:
        raise ValueError("Candidate depth must be >= 1")
    clicked = sorted({doc_id for doc_id in clicked_doc_ids if doc_id in index})
    top = [entry.doc_id for entry in retrieve(query_id, query, index, params, k)]
    if not top and not clicked:
        return None
    pool = list(dict.fromkeys([*top, *clicked]))
    run = rerank(query_id, query, pool, index, params, tag=CANDIDATE_TAG)
    relevant = set(clicked)
    qrels = [
        QrelEntry(query_id, doc_id, 1 if doc_id in relevant else 0)
        for doc_id in sorted(pool, key=lambda d: d.encode("utf-8"))
    ]
    forced = len(relevant - set(top))
    return CandidateSet(query_id=query_id, run=run, qrels=qrels, forced=forced)


def build_session_candidates(
    sessions: Iterable[Session],
    index: InvertedIndex,
    k: int,
    params: Bm25Params,
) -> CandidateReport:
    """Candidate sets for every query of the given sessions."""
    report = CandidateReport()
    for session in sessions:
        for query_index, query in enumerate(session.queries):
            report.queries += 1
            clicked = query.clicked_doc_ids
            report.clicks_not_indexed += sum(1 for doc_id in clicked if doc_id not in index)
            candidate_set = build_candidates(
                session.query_id(query_index), tokenize(query.query_text), index, clicked, k, params
            )
            if candidate_set is None:
                report.skipped += 1
                continue
            report.forced += candidate_set.forced
            report.candidate_sets.append(candidate_set)

    record_metric("candidate_queries", len(report.candidate_sets))
    record_metric("candidate_queries_skipped", report.skipped)
    logger.info("Candidates built", queries=report.queries, skipped=report.skipped, forced=report.forced)
    return report
