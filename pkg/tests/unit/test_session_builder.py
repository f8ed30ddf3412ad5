"""Unit tests for session segmentation, filtering and splits."""

import random
from datetime import date, datetime, timedelta

import pytest

from brain.session_builder import (
    SPLITS,
    Click,
    ClickMappingReport,
    Session,
    SessionQuery,
    SplitSpec,
    dataset_stats,
    filter_sessions,
    read_sessions,
    records_to_session_queries,
    segment,
    split_by_date,
    write_sessions,
)
from brain.schemas import SplitStatistics
from core.errors import DataError, SessionOrderError, SplitSpecError
from ingestion.log_parser import LogRecord

T0 = datetime(2006, 3, 1, 9, 0, 0)
GAP = 1800.0
SPEC = SplitSpec(
    train=(date(2006, 3, 1), date(2006, 4, 15)),
    dev=(date(2006, 4, 15), date(2006, 5, 1)),
    test=(date(2006, 5, 1), date(2006, 6, 1)),
)


def _q(text: str, seconds: float, *doc_ids: str) -> SessionQuery:
    return SessionQuery(text, T0 + timedelta(seconds=seconds), [Click(doc_id, 1) for doc_id in doc_ids])


def test_gap_boundaries():
    """Test a gap just under the threshold continues and one at it splits."""
    one = segment([("u", _q("a", 0)), ("u", _q("b", 29 * 60 + 59))], GAP)
    assert [len(s.queries) for s in one] == [2]
    exact = segment([("u", _q("a", 0)), ("u", _q("b", 30 * 60))], GAP)
    assert [len(s.queries) for s in exact] == [1, 1]
    two = segment([("u", _q("a", 0)), ("u", _q("b", 31 * 60))], GAP)
    assert [s.session_id for s in two] == ["u:0", "u:1"]


def test_repeated_query_merges_clicks():
    sessions = segment([("u", _q("cars", 0, "d1")), ("u", _q("cars", 10, "d2")), ("u", _q("jaguar", 20))], GAP)
    assert len(sessions) == 1
    assert [q.query_text for q in sessions[0].queries] == ["cars", "jaguar"]
    assert sessions[0].queries[0].clicked_doc_ids == ["d1", "d2"]


def test_gap_is_measured_from_previous_record():
    """Test that a merged repeat keeps the session open for the next query."""
    items = [("u", _q("jaguar", 0, "d1")), ("u", _q("jaguar", 20 * 60, "d2")), ("u", _q("jaguar cars", 40 * 60))]
    sessions = segment(items, GAP)
    assert [[q.query_text for q in s.queries] for s in sessions] == [["jaguar", "jaguar cars"]]
    merged = sessions[0].queries[0]
    assert merged.query_time == T0 + timedelta(minutes=20)
    assert merged.clicked_doc_ids == ["d1", "d2"]
    assert items[0][1].query_time == T0


def test_unsorted_input_is_rejected():
    with pytest.raises(SessionOrderError):
        segment([("u", _q("a", 100)), ("u", _q("b", 0))])
    with pytest.raises(SessionOrderError):
        segment([("u", _q("a", 0)), ("v", _q("b", 0)), ("u", _q("c", 10))])


def test_filter_sessions():
    short = Session("u:0", "u", [_q("a", 0, "d1")])
    pair = Session("u:1", "u", [_q("a", 0, "d1"), _q("b", 10)])
    repeated = Session("u:2", "u", [_q("a", 0), _q("b", 10), _q("a", 20)])
    kept = filter_sessions([short, pair, repeated], min_queries=2)
    assert [s.session_id for s in kept] == ["u:1", "u:2"]
    # the unclicked query goes first, then the session is too short
    assert filter_sessions([pair], min_queries=2, require_click=True) == []
    assert filter_sessions([repeated], min_queries=3) == []


def test_split_by_date():
    sessions = [
        Session("a:0", "a", [_q("x", 0)]),
        Session("b:0", "b", [SessionQuery("x", datetime(2006, 4, 15, 0, 0))]),
        Session("c:0", "c", [SessionQuery("x", datetime(2006, 5, 31, 23, 59))]),
        Session("d:0", "d", [SessionQuery("x", datetime(2006, 6, 1, 0, 0))]),
    ]
    result = split_by_date(sessions, SPEC)
    assert [s.session_id for s in result["train"]] == ["a:0"]
    assert [s.session_id for s in result["dev"]] == ["b:0"]
    assert [s.session_id for s in result["test"]] == ["c:0"]
    assert result.discarded == 1
    assert result["test"][0].split == "test"


def test_overlapping_split_spec():
    with pytest.raises(SplitSpecError, match="overlap"):
        SplitSpec(
            train=(date(2006, 3, 1), date(2006, 4, 20)),
            dev=(date(2006, 4, 15), date(2006, 5, 1)),
            test=(date(2006, 5, 1), date(2006, 6, 1)),
        )


def test_records_to_session_queries():
    records = [
        LogRecord("u", "a", T0, 1, "HTTP://A.COM/"),
        LogRecord("u", "b", T0, 2, "http://elsewhere.com"),
        LogRecord("u", "c", T0),
    ]
    report = ClickMappingReport()
    items = list(records_to_session_queries(records, {"http://a.com": "doc_a"}, report))
    assert items[0][1].clicks == [Click("doc_a", 1)]
    assert items[1][1].clicks == []
    assert report.records == 3
    assert report.clicks == 2
    assert report.clicks_outside_corpus == 1


def test_randomized_log_invariants():
    """Test session invariants over 10k random records of 100 users."""
    rng = random.Random(2006)
    items = []
    for user in range(100):
        when = datetime(2006, 3, 1) + timedelta(seconds=rng.randrange(80 * 86400))
        for _ in range(100):
            when += timedelta(seconds=rng.choice([5, 60, 600, 1799, 1800, 1801, 7200, 86400]))
            text = f"q{rng.randrange(12)}"
            items.append((f"user{user:03d}", SessionQuery(text, when, [Click(f"d{rng.randrange(50)}")] if rng.random() < 0.6 else [])))
    assert len(items) == 10_000

    sessions = segment(items, GAP)
    for session in sessions:
        assert session.session_id.startswith(session.user_id + ":")
        times = [q.query_time for q in session.queries]
        assert times == sorted(times)
        gaps = [(b - a).total_seconds() for a, b in zip(times, times[1:], strict=False)]
        assert all(gap < GAP for gap in gaps)
        texts = [q.query_text for q in session.queries]
        assert all(a != b for a, b in zip(texts, texts[1:], strict=False))

    kept = filter_sessions(sessions, min_queries=2)
    assert all(session.distinct_queries() >= 2 for session in kept)

    result = split_by_date(kept, SPEC)
    assigned = [s.session_id for split in SPLITS for s in result[split]]
    assert len(assigned) == len(set(assigned))
    assert len(assigned) + result.discarded == len(kept)
    for split in SPLITS:
        start, end = SPEC.ranges()[split]
        assert all(start <= s.start.date() < end for s in result[split])


def test_dataset_stats_with_baseline():
    splits = {"train": [Session("a:0", "a", [_q("x", 0), _q("y", 1), _q("z", 2)]), Session("b:0", "b", [_q("x", 0)])]}
    rows = dataset_stats(splits, baseline=[SplitStatistics(split="train", sessions=1, queries=2, avg_queries_per_session=2.0)])
    train = rows[0]
    assert (train.sessions, train.queries, train.avg_queries_per_session) == (2, 4, 2.0)
    assert train.sessions_delta_pct == pytest.approx(100.0)
    assert train.queries_delta_pct == pytest.approx(100.0)
    assert train.avg_delta_pct == pytest.approx(0.0)
    assert rows[1].sessions == 0
    assert rows[1].avg_queries_per_session == 0.0
    assert rows[1].sessions_delta_pct is None


def test_session_file_round_trip(tmp_path):
    sessions = [
        Session("u:0", "u", [_q("cars", 0, "d2", "d1"), _q("jaguar", 30)], "train"),
        Session("v:0", "v", [_q("weather today", 60, "d3")], "test"),
    ]
    path = tmp_path / "sessions.tsv"
    assert write_sessions(sessions, path) == 3
    loaded = read_sessions(path)
    assert [s.session_id for s in loaded] == ["u:0", "v:0"]
    assert loaded[0].queries[0].clicked_doc_ids == ["d1", "d2"]
    assert loaded[0].queries[1].query_time == T0 + timedelta(seconds=30)
    assert loaded[1].split == "test"
    assert loaded[0].query_id(1) == "u:0/1"


def test_read_sessions_rejects_gaps_in_indices(tmp_path):
    path = tmp_path / "sessions.tsv"
    path.write_text("u:0\tu\ttrain\t0\ta\t1141203600\t\nu:0\tu\ttrain\t2\tb\t1141203660\t\n", encoding="utf-8")
    with pytest.raises(DataError, match="out of sequence"):
        read_sessions(path)
