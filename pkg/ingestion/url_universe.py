"""Unique clicked-URL universe and its descriptive statistics."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path
from urllib.parse import urlsplit

from pydantic import BaseModel, Field

from core.errors import DataError, UrlError
from core.logging import get_logger
from ingestion.log_parser import LogRecord, canonicalize_url, is_homepage

logger = get_logger(__name__)


@dataclass(slots=True)
class UrlUniverse:
    """Canonical clicked URLs with their click counts."""

    click_counts: Counter[str] = field(default_factory=Counter)
    rejected: int = 0

    @property
    def urls(self) -> set[str]:
        return set(self.click_counts)

    def __len__(self) -> int:
        return len(self.click_counts)

    def merge(self, other: UrlUniverse) -> UrlUniverse:
        """Multiset union; commutative, so shards can merge in any order."""
        merged = UrlUniverse(Counter(self.click_counts), self.rejected + other.rejected)
        merged.click_counts.update(other.click_counts)
        return merged

    def sorted_urls(self) -> list[str]:
        return sorted(self.click_counts, key=lambda url: url.encode("utf-8"))


class UniverseStats(BaseModel):
    """Descriptive statistics of a URL universe."""

    unique_count: int = Field(..., ge=0)
    single_click_fraction: float = Field(..., ge=0, le=1)
    homepage_fraction: float = Field(..., ge=0, le=1)
    scheme_histogram: dict[str, int]
    non_http_count: int = Field(..., ge=0)
    total_clicks: int = Field(..., ge=0)


def build_url_universe(records: Iterable[LogRecord]) -> UrlUniverse:
    """Collect each canonical clicked URL once, with its total click count.

    Records without a click contribute nothing. URLs that cannot be
    canonicalized are counted in ``rejected`` and logged.
    """
    universe = UrlUniverse()
    for record in records:
        if record.click_url is None:
            continue
        try:
            url = canonicalize_url(record.click_url)
        except UrlError as e:
            universe.rejected += 1
            logger.warning("Skipping unparseable click URL", error=str(e))
            continue
        universe.click_counts[url] += 1

    logger.info("URL universe built", unique_urls=len(universe), rejected=universe.rejected)
    return universe


def universe_stats(universe: UrlUniverse) -> UniverseStats:
    """Summarise click concentration, home-page share and URI schemes."""
    total = len(universe)
    schemes: Counter[str] = Counter()
    single = 0
    homepages = 0
    for url, count in universe.click_counts.items():
        schemes[urlsplit(url).scheme] += 1
        if count == 1:
            single += 1
        if is_homepage(url):
            homepages += 1

    non_http = total - schemes.get("http", 0) - schemes.get("https", 0)
    return UniverseStats(
        unique_count=total,
        single_click_fraction=single / total if total else 0.0,
        homepage_fraction=homepages / total if total else 0.0,
        scheme_histogram=dict(sorted(schemes.items())),
        non_http_count=non_http,
        total_clicks=sum(universe.click_counts.values()),
    )


def write_universe(universe: UrlUniverse, path: Path) -> None:
    """Write ``canonical_url \\t click_count`` rows sorted bytewise by URL."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for url in universe.sorted_urls():
            f.write(f"{url}\t{universe.click_counts[url]}\n")
    logger.info("URL universe written", path=str(path), urls=len(universe))


def read_universe(path: Path) -> UrlUniverse:
    """Read a universe report written by :func:`write_universe`."""
    universe = UrlUniverse()
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            url, sep, count_text = line.rpartition("\t")
            if not sep or not count_text.isdigit() or int(count_text) < 1:
                raise DataError(f"{path}:{line_number}: malformed universe row")
            universe.click_counts[url] = int(count_text)
    return universe
