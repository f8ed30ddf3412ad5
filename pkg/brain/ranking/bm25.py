"""BM25 scoring over an inverted index."""

from __future__ import annotations

import heapq
import math
from collections.abc import Iterable
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

from brain.ranking.index import InvertedIndex
from brain.ranking.trec_files import RunEntry
from core.errors import DocumentNotFoundError

DEFAULT_TAG = "bm25"


class Bm25Params(BaseModel):
    """BM25 parameters.

    ``idf="robertson"`` is ln((N - df + 0.5) / (df + 0.5)) floored at zero, so
    terms in more than half the documents carry no weight. ``idf="lucene"``
    adds one inside the logarithm and is always positive.
    """

    model_config = ConfigDict(frozen=True)

    k1: float = Field(1.2, ge=0)
    b: float = Field(0.75, ge=0, le=1)
    idf: Literal["robertson", "lucene"] = "robertson"

    def tag(self, name: str = DEFAULT_TAG) -> str:
        """Run tag recording the scoring variant and its parameters."""
        return f"{name}-{self.idf}-k1={self.k1:g}-b={self.b:g}"


def idf(term: str, index: InvertedIndex, variant: str = "robertson") -> float:
    df = index.df(term)
    ratio = (index.doc_count - df + 0.5) / (df + 0.5)
    if variant == "lucene":
        return math.log1p(ratio)
    return max(0.0, math.log(ratio))


def bm25_score(query: Iterable[str], doc_id: str, index: InvertedIndex, params: Bm25Params) -> float:
    """BM25 over the unique query terms; unknown terms contribute nothing.

    Raises:
        DocumentNotFoundError: If the document is not indexed
    """
    if doc_id not in index:
        raise DocumentNotFoundError(doc_id)
    avg_len = index.avg_doc_length
    length_ratio = index.doc_lengths[doc_id] / avg_len if avg_len > 0 else 0.0
    norm = params.k1 * (1 - params.b + params.b * length_ratio)
    score = 0.0
    for term in sorted(set(query)):
        tf = index.tf(term, doc_id)
        if tf == 0:
            continue
        score += idf(term, index, params.idf) * tf * (params.k1 + 1) / (tf + norm)
    return score


def _ranked(query_id: str, scored: Iterable[tuple[float, str]], tag: str) -> list[RunEntry]:
    # score descending, then doc_id descending
    ordered = sorted(scored, key=lambda item: (item[0], item[1].encode("utf-8")), reverse=True)
    return [
        RunEntry(query_id=query_id, doc_id=doc_id, rank=rank, score=score, tag=tag)
        for rank, (score, doc_id) in enumerate(ordered, start=1)
    ]


def rerank(
    query_id: str,
    query: list[str],
    candidates: Iterable[str],
    index: InvertedIndex,
    params: Bm25Params,
    tag: str | None = None,
) -> list[RunEntry]:
    """Score a fixed candidate set and rank it (ties: doc_id descending)."""
    tag = tag or params.tag()
    scored = [(bm25_score(query, doc_id, index, params), doc_id) for doc_id in dict.fromkeys(candidates)]
    return _ranked(query_id, scored, tag)


def retrieve(
    query_id: str,
    query: list[str],
    index: InvertedIndex,
    params: Bm25Params,
    k: int,
    tag: str | None = None,
) -> list[RunEntry]:
    """Top-``k`` documents of the whole index with a positive score."""
    tag = tag or params.tag()
    matching: set[str] = set()
    for term in set(query):
        matching.update(doc_id for doc_id, _ in index.postings.get(term, ()))
    scored = [(bm25_score(query, doc_id, index, params), doc_id) for doc_id in matching]
    top = heapq.nlargest(k, (item for item in scored if item[0] > 0), key=lambda item: (item[0], item[1].encode("utf-8")))
    return _ranked(query_id, top, tag)
