"""Comparison of two corpus versions: key-set algebra and title overlap."""

from __future__ import annotations

import math
import random
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path

from brain.schemas import DivergentTitlePair, DocumentRecord, HistogramSummary, SetReportRow
from brain.tokenizer import tokenize
from core.logging import get_logger
from ingestion.log_parser import is_homepage

logger = get_logger(__name__)

BUCKET_COUNT = 20
LOW_OVERLAP = 0.25


@dataclass(frozen=True, slots=True)
class CorpusKeySet:
    """Named set of document keys (doc ids or canonical URLs)."""

    name: str
    keys: frozenset[str]

    @classmethod
    def of(cls, name: str, keys: Iterable[str]) -> CorpusKeySet:
        return cls(name, frozenset(keys))

    def __len__(self) -> int:
        return len(self.keys)


def set_report(a: CorpusKeySet, b: CorpusKeySet, universe_size: int) -> list[SetReportRow]:
    """Six-row comparison of two key sets against a universe size.

    Raises:
        ValueError: If the universe is smaller than the union
    """
    union = len(a.keys | b.keys)
    intersection = len(a.keys & b.keys)
    if universe_size < union:
        raise ValueError(f"Universe size {universe_size} is smaller than |{a.name} ∪ {b.name}| = {union}")
    assert union == len(a) + len(b) - intersection

    def pct(count: int) -> float:
        return 100.0 * count / universe_size if universe_size else 0.0

    counts = [
        (a.name, len(a)),
        (b.name, len(b)),
        (f"{a.name} \\ {b.name}", len(a.keys - b.keys)),
        (f"{b.name} \\ {a.name}", len(b.keys - a.keys)),
        (f"{a.name} ∪ {b.name}", union),
        (f"{a.name} ∩ {b.name}", intersection),
    ]
    return [SetReportRow(label=label, count=count, percentage=pct(count)) for label, count in counts]


def content_page_share(urls: Iterable[str]) -> float:
    """Fraction of URLs that are not home pages."""
    total = content = 0
    for url in urls:
        total += 1
        if not is_homepage(url):
            content += 1
    return content / total if total else 0.0


def title_jaccard(a: Iterable[str], b: Iterable[str]) -> float:
    """Jaccard index of two token sets; two empty sets count as identical."""
    set_a, set_b = set(a), set(b)
    if not set_a and not set_b:
        return 1.0
    return len(set_a & set_b) / len(set_a | set_b)


@dataclass(slots=True)
class JaccardHistogram:
    """Twenty right-closed buckets over [0, 1] plus exact counters.

    Bucket i covers (i/20, (i+1)/20]; the first bucket also takes 0.
    """

    counts: list[int] = field(default_factory=lambda: [0] * BUCKET_COUNT)
    exact_zero: int = 0
    exact_one: int = 0
    low_overlap: int = 0
    identical_sequences: int = 0
    both_empty: int = 0

    @property
    def bucket_edges(self) -> list[float]:
        return [i / BUCKET_COUNT for i in range(BUCKET_COUNT + 1)]

    @property
    def total(self) -> int:
        return sum(self.counts)

    def add(self, a: list[str], b: list[str]) -> float | None:
        """Count one pair; both-empty pairs are tallied separately and skipped."""
        if not a and not b:
            self.both_empty += 1
            return None
        j = title_jaccard(a, b)
        index = max(0, math.ceil(round(j * BUCKET_COUNT, 9)) - 1)
        self.counts[min(index, BUCKET_COUNT - 1)] += 1
        if j == 0.0:
            self.exact_zero += 1
        if j == 1.0:
            self.exact_one += 1
            if a == b:
                self.identical_sequences += 1
        if j <= LOW_OVERLAP:
            self.low_overlap += 1
        return j

    def merge(self, other: JaccardHistogram) -> JaccardHistogram:
        return JaccardHistogram(
            counts=[x + y for x, y in zip(self.counts, other.counts, strict=True)],
            exact_zero=self.exact_zero + other.exact_zero,
            exact_one=self.exact_one + other.exact_one,
            low_overlap=self.low_overlap + other.low_overlap,
            identical_sequences=self.identical_sequences + other.identical_sequences,
            both_empty=self.both_empty + other.both_empty,
        )

    def summary(self) -> HistogramSummary:
        total = self.total

        def fraction(count: int) -> float:
            return count / total if total else 0.0

        return HistogramSummary(
            compared_pairs=total,
            both_empty_excluded=self.both_empty,
            perfect_fraction=fraction(self.exact_one),
            le_025_fraction=fraction(self.low_overlap),
            zero_fraction=fraction(self.exact_zero),
            exact_sequence_fraction=self.identical_sequences / self.exact_one if self.exact_one else 0.0,
        )

    def rows(self) -> list[tuple[float, float, int]]:
        """(bucket_low, bucket_high, count) rows for plotting."""
        edges = self.bucket_edges
        return [(edges[i], edges[i + 1], self.counts[i]) for i in range(BUCKET_COUNT)]


def jaccard_histogram(pairs: Iterable[tuple[list[str], list[str]]]) -> tuple[JaccardHistogram, HistogramSummary]:
    """Histogram and summary fractions of title-token Jaccard over pairs."""
    histogram = JaccardHistogram()
    for a, b in pairs:
        histogram.add(a, b)
    summary = histogram.summary()
    logger.info(
        "Jaccard histogram computed",
        pairs=summary.compared_pairs,
        both_empty=summary.both_empty_excluded,
        perfect=round(summary.perfect_fraction, 4),
    )
    return histogram, summary


def write_histogram(histogram: JaccardHistogram, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("bucket_low\tbucket_high\tcount\n")
        for low, high, count in histogram.rows():
            f.write(f"{low:.2f}\t{high:.2f}\t{count}\n")


def title_pairs(
    a_docs: Mapping[str, DocumentRecord], b_docs: Mapping[str, DocumentRecord]
) -> list[tuple[str, DocumentRecord, DocumentRecord]]:
    """Documents present in both versions, in doc_id order."""
    shared = sorted(set(a_docs) & set(b_docs), key=lambda d: d.encode("utf-8"))
    return [(doc_id, a_docs[doc_id], b_docs[doc_id]) for doc_id in shared]


def sample_divergent(
    pairs: Iterable[tuple[str, DocumentRecord, DocumentRecord]],
    k: int,
    seed: int,
    threshold: float = LOW_OVERLAP,
) -> list[DivergentTitlePair]:
    """Seeded uniform sample of ``k`` pairs whose title Jaccard is at most ``threshold``.

    Raises:
        ValueError: If fewer than ``k`` pairs qualify
    """
    population: list[DivergentTitlePair] = []
    for doc_id, a, b in pairs:
        j = title_jaccard(tokenize(a.title), tokenize(b.title))
        if j <= threshold:
            population.append(DivergentTitlePair(doc_id=doc_id, title_a=a.title, title_b=b.title, jaccard=j))
    if k > len(population):
        raise ValueError(f"Requested {k} divergent pairs but only {len(population)} qualify")
    population.sort(key=lambda row: row.doc_id)
    sample = random.Random(seed).sample(population, k)
    logger.info("Divergent sample drawn", population=len(population), k=k, seed=seed)
    return sorted(sample, key=lambda row: row.doc_id)


def write_review_sheet(rows: Iterable[DivergentTitlePair], path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("doc_id\ttitle_a\ttitle_b\tjaccard\n")
        for row in rows:
            f.write(f"{row.doc_id}\t{row.title_a}\t{row.title_b}\t{row.jaccard:.4f}\n")


def overlay_titles(
    doc_ids: Iterable[str],
    replacement: Mapping[str, DocumentRecord],
) -> tuple[dict[str, str], float]:
    """Titles for ``doc_ids`` taken from another corpus version.

    Documents missing from ``replacement`` get a blank title.

    Returns:
        (doc_id -> title, fraction of blanks)
    """
    titles: dict[str, str] = {}
    blanks = 0
    for doc_id in doc_ids:
        doc = replacement.get(doc_id)
        if doc is None:
            blanks += 1
            titles[doc_id] = ""
        else:
            titles[doc_id] = doc.title
    fraction = blanks / len(titles) if titles else 0.0
    logger.info("Titles overlaid", documents=len(titles), blank_fraction=round(fraction, 4))
    return titles, fraction
