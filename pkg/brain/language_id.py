"""Rank-order character n-gram language identification.

Profiles hold the top-K character n-grams (n = 1..4, words padded with "_")
of a training sample, ranked 1..K by frequency. A text is assigned the
profile with the smallest out-of-place distance to its own n-gram ranking.
"""

from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from pathlib import Path

from brain.schemas import DocumentRecord, LanguageShare
from core.errors import ProfileError
from core.logging import get_logger
from core.observability import record_metric

logger = get_logger(__name__)

DEFAULT_PROFILE_SIZE = 400
MIN_SAMPLE_CHARS = 1000
MIN_CLASSIFY_CHARS = 20
NGRAM_SIZES = (1, 2, 3, 4)
UNDETERMINED = "und"
OTHERS = "others"

PROFILE_DIR = Path(__file__).parent / "lang_profiles"
SEED_DIR = PROFILE_DIR / "seed"

# Languages broken out individually in the corpus language table
TABLE_LANGUAGES = ("en", "fr", "es", "de", "it", "ja", "pt", "nl", "ru")

_LETTER_RUN = re.compile(r"[^\W\d_]+")


@dataclass(frozen=True, slots=True)
class LanguageProfile:
    lang: str
    ngram_ranks: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.ngram_ranks)


@dataclass(frozen=True, slots=True)
class Classification:
    lang: str
    out_of_place_score: int | None


def ngram_counts(text: str) -> Counter[str]:
    """Character n-gram frequencies over letter runs padded with underscores."""
    counts: Counter[str] = Counter()
    for word in _LETTER_RUN.findall(text.lower()):
        padded = f"_{word}_"
        for n in NGRAM_SIZES:
            for i in range(len(padded) - n + 1):
                gram = padded[i : i + n]
                if gram != "_":
                    counts[gram] += 1
    return counts


def rank_ngrams(counts: Mapping[str, int], size: int = DEFAULT_PROFILE_SIZE) -> dict[str, int]:
    """Top ``size`` n-grams ranked 1..K, ties broken by the n-gram text."""
    ordered = sorted(counts.items(), key=lambda item: (-item[1], item[0]))[:size]
    return {gram: rank for rank, (gram, _) in enumerate(ordered, start=1)}


def train_profile(sample_text: str, lang: str, size: int = DEFAULT_PROFILE_SIZE) -> LanguageProfile:
    """Build a ranked n-gram profile from a training sample.

    Raises:
        ProfileError: If the sample is shorter than 1000 characters
    """
    if len(sample_text) < MIN_SAMPLE_CHARS:
        raise ProfileError(
            f"Training sample for {lang!r} has {len(sample_text)} characters; need at least {MIN_SAMPLE_CHARS}"
        )
    return LanguageProfile(lang=lang, ngram_ranks=rank_ngrams(ngram_counts(sample_text), size))


def out_of_place(text_ranks: Mapping[str, int], profile: LanguageProfile, max_penalty: int) -> int:
    """Sum of rank displacements; n-grams missing from the profile cost ``max_penalty``."""
    distance = 0
    for gram, rank in text_ranks.items():
        profile_rank = profile.ngram_ranks.get(gram)
        distance += max_penalty if profile_rank is None else abs(profile_rank - rank)
    return distance


def classify(text: str, profiles: Iterable[LanguageProfile]) -> Classification:
    """Assign the language whose profile is nearest by out-of-place distance.

    Texts shorter than 20 characters are ``und``. Equal distances resolve to
    the lowest language code, so load order never matters.

    Raises:
        ProfileError: If no profiles are given
    """
    profiles = list(profiles)
    if not profiles:
        raise ProfileError("No language profiles loaded")
    if len(text.strip()) < MIN_CLASSIFY_CHARS:
        return Classification(UNDETERMINED, None)

    max_penalty = max(profile.size for profile in profiles)
    text_ranks = rank_ngrams(ngram_counts(text), max_penalty)
    if not text_ranks:
        return Classification(UNDETERMINED, None)
    score, lang = min((out_of_place(text_ranks, profile, max_penalty), profile.lang) for profile in profiles)
    return Classification(lang, score)


def _shares(counts: Counter[str]) -> list[LanguageShare]:
    total = sum(counts.values())
    if not total:
        return []
    return [
        LanguageShare(language=lang, count=count, percentage=100.0 * count / total)
        for lang, count in sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    ]


def corpus_language_report(docs: Iterable[DocumentRecord], profiles: Iterable[LanguageProfile]) -> list[LanguageShare]:
    """Percentage of documents per language, classified over title and body."""
    profiles = list(profiles)
    counts: Counter[str] = Counter()
    for doc in docs:
        counts[classify(f"{doc.title} {doc.body}", profiles).lang] += 1
    record_metric("documents_classified", sum(counts.values()))
    return _shares(counts)


def query_language_report(queries: Iterable[str], profiles: Iterable[LanguageProfile]) -> list[LanguageShare]:
    """Percentage of queries per language (short texts mostly fall into ``und``)."""
    profiles = list(profiles)
    counts: Counter[str] = Counter(classify(query, profiles).lang for query in queries)
    return _shares(counts)


def language_table(shares: Iterable[LanguageShare], named: Iterable[str] = TABLE_LANGUAGES) -> list[LanguageShare]:
    """Fold languages outside ``named`` (and ``und``) into one ``others`` row."""
    named = set(named)
    rows: list[LanguageShare] = []
    other_count = 0
    other_pct = 0.0
    for share in shares:
        if share.language in named:
            rows.append(share)
        else:
            other_count += share.count
            other_pct += share.percentage
    if other_count:
        rows.append(LanguageShare(language=OTHERS, count=other_count, percentage=other_pct))
    return rows


def write_profile(profile: LanguageProfile, path: Path) -> None:
    """Write ``ngram \\t rank`` rows in rank order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for gram, rank in sorted(profile.ngram_ranks.items(), key=lambda item: item[1]):
            f.write(f"{gram}\t{rank}\n")


def read_profile(path: Path, lang: str | None = None) -> LanguageProfile:
    """Read a profile file; the language defaults to the file stem.

    Raises:
        ProfileError: On malformed rows or ranks that are not a permutation of 1..K
    """
    ranks: dict[str, int] = {}
    with open(path, encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            gram, sep, rank_text = line.rstrip("\n").partition("\t")
            if not sep or not gram or not rank_text.isdigit():
                raise ProfileError(f"{path}:{line_number}: expected 'ngram<TAB>rank'")
            ranks[gram] = int(rank_text)
    if sorted(ranks.values()) != list(range(1, len(ranks) + 1)):
        raise ProfileError(f"{path}: ranks are not a permutation of 1..{len(ranks)}")
    return LanguageProfile(lang=lang or path.stem, ngram_ranks=ranks)


def load_bundled_profiles(profile_dir: Path = PROFILE_DIR) -> list[LanguageProfile]:
    """Read the shipped ``<lang>.tsv`` profiles, in language-code order."""
    profiles = [read_profile(path) for path in sorted(profile_dir.glob("*.tsv"))]
    if not profiles:
        raise ProfileError(f"No language profiles found in {profile_dir}")
    logger.debug("Language profiles loaded", languages=[p.lang for p in profiles])
    return profiles


def train_seed_profiles(seed_dir: Path = SEED_DIR, size: int = DEFAULT_PROFILE_SIZE) -> list[LanguageProfile]:
    """Train one profile per seed text; the shipped profiles are these, written with ``write_profile``."""
    profiles = [
        train_profile(path.read_text(encoding="utf-8"), path.stem, size) for path in sorted(seed_dir.glob("*.txt"))
    ]
    if not profiles:
        raise ProfileError(f"No seed texts found in {seed_dir}")
    return profiles
