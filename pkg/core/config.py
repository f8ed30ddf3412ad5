"""Configuration management using Pydantic Settings."""

import hashlib
import json
from datetime import date, datetime
from pathlib import Path
from typing import TYPE_CHECKING, Literal

from pydantic import field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

if TYPE_CHECKING:
    from brain.ranking.bm25 import Bm25Params
    from brain.session_builder import SplitSpec
    from ingestion.archive_client import FetchPolicy

TOOL_NAME = "aolia-tools"
TOOL_VERSION = "0.1.0"

# Availability lookups target the first day of the query log
DEFAULT_TARGET_TIMESTAMP = "20060301000000"

_UNHASHED_FIELDS = {
    "LOG_LEVEL",
    "LOG_FORMAT",
    "LOG_DIR",
    "WORK_DIR",
    "MAPPING_FILE",
    "DOC_STORE",
    "SESSION_DIR",
    "RUN_DIR",
    "TITLES_FROM",
    "ARCHIVE_ENDPOINT",
    "JOBS",
}


def parse_date_range(value: str) -> tuple[date, date]:
    """Parse a half-open ``YYYY-MM-DD..YYYY-MM-DD`` interval.

    Args:
        value: Range text

    Returns:
        (start, end) with start < end

    Raises:
        ValueError: If the text is not a valid non-empty range
    """
    start_text, sep, end_text = value.partition("..")
    if not sep:
        raise ValueError(f"Date range must look like YYYY-MM-DD..YYYY-MM-DD, got {value!r}")
    start = date.fromisoformat(start_text.strip())
    end = date.fromisoformat(end_text.strip())
    if end <= start:
        raise ValueError(f"Date range end must be after start: {value!r}")
    return start, end


class Settings(BaseSettings):
    """Pipeline settings.

    Values come from (highest priority first) init kwargs / command-line flags,
    environment variables, the ``key=value`` configuration file and ``.env``.
    """

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "console"

    # Paths
    LOG_DIR: Path = Path("data/logs")
    WORK_DIR: Path = Path("data/work")
    MAPPING_FILE: Path = Path("data/work/aol.id2wb.tsv.gz")
    DOC_STORE: Path = Path("data/work/docs")
    SESSION_DIR: Path = Path("data/work/sessions")
    RUN_DIR: Path = Path("data/work/runs")

    # Archive client
    ARCHIVE_ENDPOINT: str = "https://archive.org/wayback/available"
    TARGET_TIMESTAMP: str = DEFAULT_TARGET_TIMESTAMP
    MAX_CONCURRENCY: int = 4
    MIN_REQUEST_INTERVAL: float = 1.0  # seconds, per host
    MAX_RETRIES: int = 3
    BACKOFF_BASE: float = 1.0  # seconds
    PER_URL_BUDGET: float = 300.0  # seconds
    REQUEST_TIMEOUT: float = 30.0

    # Extraction
    MAX_DOC_TOKENS: int = 2_000_000
    STORE_BLOCK_SIZE: int = 256

    # Sessions
    GAP_THRESHOLD: float = 1800.0  # seconds
    MIN_QUERIES: int = 2
    REQUIRE_CLICK: bool = False
    TRAIN_RANGE: str | None = None
    DEV_RANGE: str | None = None
    TEST_RANGE: str | None = None

    # Ranking
    BM25_K1: float = 1.2
    BM25_B: float = 0.75
    BM25_IDF: Literal["robertson", "lucene"] = "robertson"
    CANDIDATE_DEPTH: int = 50
    INCLUDE_URL: bool = False
    INCLUDE_BODY: bool = False
    TITLES_FROM: Path | None = None  # document store whose titles replace ours when indexing
    SIGNIFICANCE_ALPHA: float = 0.05

    # Execution
    JOBS: int = 1
    SEED: int = 42

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        if v.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"unknown log level {v!r}")
        return v.upper()

    @field_validator("TARGET_TIMESTAMP")
    @classmethod
    def validate_target_timestamp(cls, v: str) -> str:
        """Require a 14-digit calendar timestamp."""
        parse_timestamp14(v)
        return v

    @field_validator("MAX_CONCURRENCY", "JOBS", "CANDIDATE_DEPTH", "MIN_QUERIES", "STORE_BLOCK_SIZE")
    @classmethod
    def validate_positive(cls, v: int) -> int:
        if v < 1:
            raise ValueError("must be >= 1")
        return v

    @field_validator("MAX_RETRIES")
    @classmethod
    def validate_retries(cls, v: int) -> int:
        if v < 0:
            raise ValueError("must be >= 0")
        return v

    @field_validator("BM25_K1")
    @classmethod
    def validate_k1(cls, v: float) -> float:
        if v < 0:
            raise ValueError("k1 must be >= 0")
        return v

    @field_validator("BM25_B")
    @classmethod
    def validate_b(cls, v: float) -> float:
        if not 0.0 <= v <= 1.0:
            raise ValueError("b must lie in [0, 1]")
        return v

    @field_validator("TRAIN_RANGE", "DEV_RANGE", "TEST_RANGE")
    @classmethod
    def validate_range(cls, v: str | None) -> str | None:
        if v:
            parse_date_range(v)
        return v or None

    @model_validator(mode="after")
    def validate_intervals(self) -> "Settings":
        """Reject negative durations."""
        for name in ("MIN_REQUEST_INTERVAL", "BACKOFF_BASE", "GAP_THRESHOLD", "PER_URL_BUDGET"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        return self

    def config_hash(self) -> str:
        """SHA-256 over the canonical JSON form of the settings that shape outputs.

        Paths, logging and the job count do not change artifact content and are
        left out so relocated runs stamp identically.
        """
        payload = json.dumps(
            self.model_dump(mode="json", exclude=_UNHASHED_FIELDS),
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()

    def fetch_policy(self) -> "FetchPolicy":
        from ingestion.archive_client import FetchPolicy

        return FetchPolicy(
            target_timestamp=self.TARGET_TIMESTAMP,
            max_concurrency=self.MAX_CONCURRENCY,
            min_request_interval_per_host=self.MIN_REQUEST_INTERVAL,
            max_retries=self.MAX_RETRIES,
            backoff_base=self.BACKOFF_BASE,
            per_url_budget=self.PER_URL_BUDGET,
            timeout=self.REQUEST_TIMEOUT,
        )

    def split_spec(self) -> "SplitSpec":
        from brain.session_builder import SplitSpec

        ranges = {}
        for split, value in (("train", self.TRAIN_RANGE), ("dev", self.DEV_RANGE), ("test", self.TEST_RANGE)):
            if value is None:
                raise ValueError(f"{split.upper()}_RANGE is not configured")
            ranges[split] = parse_date_range(value)
        return SplitSpec(train=ranges["train"], dev=ranges["dev"], test=ranges["test"])

    def bm25_params(self) -> "Bm25Params":
        from brain.ranking.bm25 import Bm25Params

        return Bm25Params(k1=self.BM25_K1, b=self.BM25_B, idf=self.BM25_IDF)


def parse_timestamp14(value: str) -> datetime:
    """Parse a 14-digit ``YYYYMMDDhhmmss`` timestamp.

    Raises:
        ValueError: If the value is not 14 digits or not a calendar instant
    """
    if len(value) != 14 or not value.isdigit():
        raise ValueError(f"Timestamp must be 14 digits, got {value!r}")
    return datetime.strptime(value, "%Y%m%d%H%M%S")


def load_settings(config_path: Path | None = None, **overrides) -> Settings:
    """Build settings from a config file plus flag overrides (flags win)."""
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if config_path is not None:
        if not config_path.is_file():
            raise FileNotFoundError(f"Config file not found: {config_path}")
        # later env files win, so the config file outranks .env
        return Settings(_env_file=(".env", config_path), **overrides)
    return Settings(**overrides)


settings = Settings()
