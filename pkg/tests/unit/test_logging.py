"""Unit tests for logging helpers."""

from pathlib import Path

from core.errors import LogParseError, MissingArtifactError, NetworkExhaustedError, SplitSpecError, UsageError
from core.logging import configure_logging, filter_sensitive_data, format_error_message, get_logger, stage_context


def test_filter_sensitive_data():
    """Test that user ids and query text never reach the log."""
    event = {"event": "Session built", "user_id": "479", "query_text": "my address", "queries": 4}
    filtered = filter_sensitive_data(None, "info", event)
    assert filtered["user_id"] == "[REDACTED]"
    assert filtered["query_text"] == "[REDACTED]"
    assert filtered["queries"] == 4


def test_format_error_message():
    message = format_error_message(MissingArtifactError(Path("work/runs/title/bm25.run"), "rerank"), {"stage": "eval"})
    assert message.startswith("Missing upstream artifact during eval: ")
    assert "run `rerank` first" in message
    assert format_error_message(UsageError("bad flag")) == "Usage error: bad flag"
    assert format_error_message(NetworkExhaustedError("3 URLs deferred")).startswith("Archive requests exhausted")
    assert format_error_message(ValueError("x" * 600)) == "Invalid input"


def test_configure_logging_json(capsys):
    configure_logging(log_level="INFO", log_format="json")
    get_logger("tests").info("Stage started", stage="ingest", user_id="anon-77731")
    err = capsys.readouterr().err
    assert '"stage": "ingest"' in err
    assert "anon-77731" not in err


def test_subclasses_inherit_labels():
    assert format_error_message(LogParseError("expected 5 fields", 7, "log.txt")) == "Data error: log.txt:7: expected 5 fields"
    assert format_error_message(SplitSpecError("overlap"), {"stage": "sessions"}) == "Usage error during sessions: overlap"
    assert format_error_message(KeyError("x")).startswith("Error: KeyError")


def test_stage_context_binds_stage(capsys):
    configure_logging(log_level="INFO", log_format="json")
    with stage_context("extract"):
        get_logger("tests").info("Documents stored", documents=3)
    get_logger("tests").info("Outside")
    lines = capsys.readouterr().err.splitlines()
    assert '"stage": "extract"' in lines[0]
    assert '"stage"' not in lines[1]
