"""Pydantic models for extracted documents and analysis reports."""

from __future__ import annotations

import re

from pydantic import BaseModel, ConfigDict, Field, field_validator

from core.config import parse_timestamp14

_LANG_CODE = re.compile(r"^[a-z]{2}$|^und$")


class DocumentRecord(BaseModel):
    """Extracted document: title and body text of one archived page."""

    model_config = ConfigDict(frozen=True)

    doc_id: str = Field(..., min_length=1, description="Stable document identifier")
    url: str = Field(..., min_length=1, description="Canonical original URL")
    title: str = Field("", description="Whitespace-collapsed title text")
    body: str = Field("", description="Visible body text")
    timestamp: str = Field(..., description="Snapshot timestamp YYYYMMDDhhmmss")
    language: str | None = Field(None, description="Two-letter language code or 'und'")

    @field_validator("timestamp")
    @classmethod
    def validate_timestamp(cls, v: str) -> str:
        """Validate the 14-digit snapshot timestamp."""
        parse_timestamp14(v)
        return v

    @field_validator("language")
    @classmethod
    def validate_language(cls, v: str | None) -> str | None:
        """Validate language code shape."""
        if v is None:
            return None
        if not _LANG_CODE.match(v):
            raise ValueError(f"Language must be a 2-letter code or 'und', got {v!r}")
        return v

    @field_validator("title", "body")
    @classmethod
    def validate_no_markup(cls, v: str) -> str:
        """Extracted text never carries markup delimiters."""
        if "<" in v or ">" in v:
            raise ValueError("Extracted text must not contain markup characters")
        return v


class LengthSummary(BaseModel):
    """Median and interquartile range of token counts."""

    median: float
    q1: float
    q3: float
    maximum: int


class CorpusStatistics(BaseModel):
    """Token-length statistics over a document collection."""

    documents: int = Field(..., ge=0)
    title_tokens: LengthSummary
    body_tokens: LengthSummary
    empty_titles: int = Field(0, ge=0)


class ExtractionReport(BaseModel):
    """Outcome counters of one extraction pass."""

    attempted: int = 0
    extracted: int = 0
    excluded: int = 0
    truncated: int = 0
    excluded_doc_ids: list[str] = Field(default_factory=list)

    @property
    def excluded_fraction(self) -> float:
        return self.excluded / self.attempted if self.attempted else 0.0


class LanguageShare(BaseModel):
    """One row of a language breakdown table."""

    language: str
    count: int
    percentage: float


class SetReportRow(BaseModel):
    """One row of a two-corpus set comparison."""

    label: str
    count: int
    percentage: float


class HistogramSummary(BaseModel):
    """Summary fractions derived from exact Jaccard counters."""

    compared_pairs: int
    both_empty_excluded: int
    perfect_fraction: float
    le_025_fraction: float
    zero_fraction: float
    exact_sequence_fraction: float
    population: str = "intersection"


class DivergentTitlePair(BaseModel):
    """A review-sheet row for a pair of diverging titles."""

    doc_id: str
    title_a: str
    title_b: str
    jaccard: float


class SplitStatistics(BaseModel):
    """Session counts of one split, with optional deltas against a baseline."""

    split: str
    sessions: int = 0
    queries: int = 0
    avg_queries_per_session: float = 0.0
    sessions_delta_pct: float | None = None
    queries_delta_pct: float | None = None
    avg_delta_pct: float | None = None
