"""Structured logging configuration."""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import structlog

# Query logs are personal data: identities and query strings stay out of logs
REDACTED_FIELDS = ("user_id", "query", "query_text")

# Checked along the exception's MRO, so subclasses inherit their parent's label
ERROR_LABELS = {
    "MissingArtifactError": "Missing upstream artifact",
    "QueryMismatchError": "Query sets differ",
    "NetworkExhaustedError": "Archive requests exhausted",
    "UsageError": "Usage error",
    "DataError": "Data error",
    "FileNotFoundError": "File not found",
    "PermissionError": "Permission denied",
    "TimeoutError": "Operation timed out",
    "ValueError": "Invalid input",
}

MAX_DETAIL_LENGTH = 500


def configure_logging(log_level: str = "INFO", log_format: str = "console") -> None:
    """Configure structlog for the pipeline.

    Args:
        log_level: Standard level name
        log_format: ``json`` for one JSON object per line, anything else for
            the human-readable console renderer
    """
    level = logging.getLevelName(log_level.upper())
    if not isinstance(level, int):
        raise ValueError(f"Unknown log level {log_level!r}")

    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)

    renderer = structlog.processors.JSONRenderer() if log_format == "json" else structlog.dev.ConsoleRenderer()
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            filter_sensitive_data,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=True,
    )


def get_logger(name: str) -> Any:
    """Get a structured logger instance."""
    return structlog.get_logger(name)


@contextmanager
def stage_context(stage: str, **values: Any) -> Iterator[None]:
    """Attach ``stage`` (and any extra values) to every log line in the block."""
    with structlog.contextvars.bound_contextvars(stage=stage, **values):
        yield


def filter_sensitive_data(logger: Any, method_name: str, event_dict: dict) -> dict:
    """Redact query-log identity and query text from log events."""
    for field in REDACTED_FIELDS:
        if field in event_dict:
            event_dict[field] = "[REDACTED]"
    return event_dict


def format_error_message(error: Exception, context: dict[str, Any] | None = None) -> str:
    """Format an error for the command line.

    Args:
        error: Exception that occurred
        context: ``stage`` names the subcommand that failed

    Returns:
        ``<label> during <stage>: <detail>``; the detail is dropped when overly long
    """
    label = next(
        (ERROR_LABELS[cls.__name__] for cls in type(error).__mro__ if cls.__name__ in ERROR_LABELS),
        f"Error: {type(error).__name__}",
    )
    if context and context.get("stage"):
        label = f"{label} during {context['stage']}"

    detail = str(error)
    if detail and len(detail) < MAX_DETAIL_LENGTH:
        return f"{label}: {detail}"
    return label
