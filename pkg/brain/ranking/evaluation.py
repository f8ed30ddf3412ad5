"""MAP, MRR and P@1 with score-then-doc_id tie-breaking."""

from __future__ import annotations

import math
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from brain.ranking.trec_files import QrelEntry, RunEntry
from core.errors import QueryMismatchError
from core.logging import get_logger

logger = get_logger(__name__)

MEASURES = ("map", "mrr", "p1")


@dataclass(frozen=True, slots=True)
class QueryMeasures:
    ap: float
    rr: float
    p1: float

    def get(self, measure: str) -> float:
        return {"map": self.ap, "mrr": self.rr, "p1": self.p1}[measure]


@dataclass(slots=True)
class MeasureResult:
    """Per-query values and their arithmetic means."""

    name: str
    per_query: dict[str, QueryMeasures] = field(default_factory=dict)
    aggregate: dict[str, float] = field(default_factory=dict)
    excluded_queries: int = 0

    def values(self, measure: str) -> dict[str, float]:
        return {qid: q.get(measure) for qid, q in self.per_query.items()}


def sort_run(entries: Iterable[RunEntry]) -> list[RunEntry]:
    """Score descending, ties by doc_id descending; input ranks are ignored."""
    return sorted(entries, key=lambda e: (e.score, e.doc_id.encode("utf-8")), reverse=True)


def query_measures(ranking: list[str], judgments: dict[str, int]) -> QueryMeasures:
    """Measures of one ranked doc_id list; relevance >= 1 counts as relevant."""
    relevant = {doc_id for doc_id, rel in judgments.items() if rel >= 1}
    hits = 0
    precision_sum = 0.0
    rr = 0.0
    seen: set[str] = set()
    rank = 0
    for doc_id in ranking:
        if doc_id in seen:
            continue
        seen.add(doc_id)
        rank += 1
        if doc_id in relevant:
            hits += 1
            precision_sum += hits / rank
            if rr == 0.0:
                rr = 1.0 / rank
    ap = precision_sum / len(relevant) if relevant else 0.0
    p1 = 1.0 if ranking and ranking[0] in relevant else 0.0
    return QueryMeasures(ap=ap, rr=rr, p1=p1)


def evaluate(run: Iterable[RunEntry], qrels: Iterable[QrelEntry], name: str = "run") -> MeasureResult:
    """Evaluate a run against judgments.

    Aggregates are means over judged queries with at least one relevant
    document; such queries missing from the run score zero.

    Raises:
        QueryMismatchError: If the run holds queries without judgments
    """
    judgments: dict[str, dict[str, int]] = defaultdict(dict)
    for qrel in qrels:
        judgments[qrel.query_id][qrel.doc_id] = qrel.relevance

    by_query: dict[str, list[RunEntry]] = defaultdict(list)
    for entry in run:
        by_query[entry.query_id].append(entry)

    unjudged = set(by_query) - set(judgments)
    if unjudged:
        raise QueryMismatchError("Run contains queries without judgments", unjudged)

    result = MeasureResult(name=name)
    for query_id in sorted(judgments):
        if not any(rel >= 1 for rel in judgments[query_id].values()):
            result.excluded_queries += 1
            continue
        ranking = [entry.doc_id for entry in sort_run(by_query.get(query_id, ()))]
        result.per_query[query_id] = query_measures(ranking, judgments[query_id])

    n = len(result.per_query)
    for measure in MEASURES:
        values = [q.get(measure) for q in result.per_query.values()]
        result.aggregate[measure] = math.fsum(values) / n if n else 0.0

    logger.info(
        "Run evaluated",
        name=name,
        queries=n,
        excluded=result.excluded_queries,
        **{measure: round(value, 4) for measure, value in result.aggregate.items()},
    )
    return result


def measure_deltas(base: MeasureResult, variant: MeasureResult) -> dict[str, tuple[float, float | None]]:
    """Absolute and relative (percent) change of each aggregate measure."""
    deltas: dict[str, tuple[float, float | None]] = {}
    for measure in MEASURES:
        before = base.aggregate.get(measure, 0.0)
        after = variant.aggregate.get(measure, 0.0)
        deltas[measure] = (after - before, 100.0 * (after - before) / before if before else None)
    return deltas


def write_measures(result: MeasureResult, path: Path) -> None:
    """Per-query measures followed by an ``all`` row of aggregates."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("query_id\t" + "\t".join(MEASURES) + "\n")
        for query_id in sorted(result.per_query):
            values = result.per_query[query_id]
            f.write(query_id + "\t" + "\t".join(f"{values.get(m):.6f}" for m in MEASURES) + "\n")
        f.write("all\t" + "\t".join(f"{result.aggregate.get(m, 0.0):.6f}" for m in MEASURES) + "\n")
    logger.info("Measures written", path=str(path), queries=len(result.per_query))
