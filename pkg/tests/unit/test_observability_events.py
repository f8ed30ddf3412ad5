"""Unit tests for observability helpers."""

from core.observability import record_event, record_metric, record_stage_failure


def test_record_event_emits_log() -> None:
    """record_event should execute without error."""
    assert record_event("mapping_revalidated", removed="3") is None


def test_record_metric_emits_log() -> None:
    """record_metric should execute without error."""
    assert record_metric("crawl_disposition", 12, disposition="fetched") is None


def test_record_stage_failure_emits_log() -> None:
    assert record_stage_failure("extract", "0123456789ab", "empty payload") is None
