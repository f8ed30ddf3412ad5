"""Unit tests for MAP, MRR and P@1."""

import random

import pytest

from brain.ranking.evaluation import (
    MEASURES,
    evaluate,
    measure_deltas,
    query_measures,
    sort_run,
    write_measures,
)
from brain.ranking.trec_files import QrelEntry, RunEntry
from core.errors import QueryMismatchError


def _reference(ranking: list[str], relevant: set[str]) -> tuple[float, float, float]:
    """Textbook definitions over a ranking without duplicates."""
    precisions = [
        sum(1 for doc in ranking[: rank + 1] if doc in relevant) / (rank + 1)
        for rank, doc in enumerate(ranking)
        if doc in relevant
    ]
    ap = sum(precisions) / len(relevant)
    first = next((rank for rank, doc in enumerate(ranking, start=1) if doc in relevant), None)
    rr = 1.0 / first if first else 0.0
    p1 = 1.0 if ranking and ranking[0] in relevant else 0.0
    return ap, rr, p1


def _run(query_id: str, scores: dict[str, float]) -> list[RunEntry]:
    return [RunEntry(query_id, doc_id, 1, score, "t") for doc_id, score in scores.items()]


def test_query_measures():
    measures = query_measures(["d1", "d2", "d3", "d4"], {"d2": 1, "d4": 2, "d5": 0})
    assert measures.ap == pytest.approx((1 / 2 + 2 / 4) / 2)
    assert measures.rr == pytest.approx(0.5)
    assert measures.p1 == 0.0
    assert query_measures([], {"d1": 1}).ap == 0.0
    both = query_measures(["d1", "d2", "d3"], {"d1": 1, "d3": 1})
    assert (both.ap, both.rr, both.p1) == (pytest.approx((1 + 2 / 3) / 2), 1.0, 1.0)


def test_sort_run_ignores_input_ranks():
    """Test score descending with ties broken by doc_id descending."""
    entries = [
        RunEntry("q", "a", 1, 1.0, "t"),
        RunEntry("q", "c", 2, 1.0, "t"),
        RunEntry("q", "b", 3, 2.0, "t"),
        RunEntry("q", "d", 4, 0.5, "t"),
    ]
    assert [e.doc_id for e in sort_run(entries)] == ["b", "c", "a", "d"]


def test_tie_breaking_changes_measures():
    qrels = [QrelEntry("q", "a", 1), QrelEntry("q", "z", 0)]
    result = evaluate(_run("q", {"a": 1.0, "z": 1.0}), qrels)
    # z outranks a on the tie
    assert result.aggregate["p1"] == 0.0
    assert result.aggregate["mrr"] == pytest.approx(0.5)


def test_against_reference_on_random_instances():
    """Test 100 random instances against the textbook definitions."""
    rng = random.Random(7)
    for trial in range(100):
        docs = [f"d{i:02d}" for i in range(rng.randint(1, 20))]
        scores = {doc: float(rng.randint(0, 5)) for doc in docs}
        relevant = set(rng.sample(docs, rng.randint(1, len(docs))))
        extra = {f"unretrieved{i}" for i in range(rng.randint(0, 2))}
        qrels = [QrelEntry("q", doc, 1 if doc in relevant else 0) for doc in docs]
        qrels += [QrelEntry("q", doc, 1) for doc in extra]

        ranking = sorted(docs, key=lambda d: (scores[d], d), reverse=True)
        ap, rr, p1 = _reference(ranking, relevant | extra)
        result = evaluate(_run("q", scores), qrels).per_query["q"]
        assert result.ap == pytest.approx(ap, rel=0, abs=1e-9), trial
        assert result.rr == pytest.approx(rr, rel=0, abs=1e-9), trial
        assert result.p1 == p1, trial


def test_row_order_does_not_matter():
    rng = random.Random(11)
    run = [RunEntry(f"q{q}", f"d{d}", 1, rng.random(), "t") for q in range(5) for d in range(10)]
    qrels = [QrelEntry(f"q{q}", f"d{d}", int(d == 0 or rng.random() < 0.3)) for q in range(5) for d in range(10)]
    baseline = evaluate(run, qrels).aggregate
    for _ in range(5):
        shuffled_run = rng.sample(run, len(run))
        shuffled_qrels = rng.sample(qrels, len(qrels))
        assert evaluate(shuffled_run, shuffled_qrels).aggregate == pytest.approx(baseline)


def test_single_relevant_document_makes_map_equal_mrr():
    rng = random.Random(3)
    run: list[RunEntry] = []
    qrels: list[QrelEntry] = []
    for q in range(20):
        docs = [f"d{i}" for i in range(8)]
        run += _run(f"q{q}", {doc: rng.random() for doc in docs})
        target = rng.choice(docs)
        qrels += [QrelEntry(f"q{q}", doc, int(doc == target)) for doc in docs]
    result = evaluate(run, qrels)
    assert result.aggregate["map"] == pytest.approx(result.aggregate["mrr"])


def test_query_set_handling():
    """Test exclusion of queries without relevant documents and missing-query scoring."""
    qrels = [
        QrelEntry("q1", "a", 1),
        QrelEntry("q2", "b", 0),
        QrelEntry("q3", "c", 1),
    ]
    run = _run("q1", {"a": 1.0}) + _run("q2", {"b": 1.0})
    result = evaluate(run, qrels, name="title")
    assert result.name == "title"
    assert result.excluded_queries == 1
    assert set(result.per_query) == {"q1", "q3"}
    # q3 is judged but not retrieved
    assert result.aggregate["map"] == pytest.approx(0.5)

    with pytest.raises(QueryMismatchError):
        evaluate(_run("q9", {"a": 1.0}), qrels)


def test_empty_judgments_aggregate_to_zero():
    result = evaluate([], [])
    assert result.aggregate == {measure: 0.0 for measure in MEASURES}


def test_measure_deltas():
    base = evaluate(_run("q", {"a": 1.0, "b": 2.0}), [QrelEntry("q", "a", 1)])
    better = evaluate(_run("q", {"a": 3.0, "b": 2.0}), [QrelEntry("q", "a", 1)])
    deltas = measure_deltas(base, better)
    assert deltas["map"][0] == pytest.approx(0.5)
    assert deltas["map"][1] == pytest.approx(100.0)
    assert deltas["p1"] == (1.0, None)


def test_write_measures(tmp_path):
    qrels = [QrelEntry("q2", "a", 1), QrelEntry("q1", "b", 1)]
    result = evaluate(_run("q2", {"a": 1.0}) + _run("q1", {"x": 2.0, "b": 1.0}), qrels)
    path = tmp_path / "eval" / "title.tsv"
    write_measures(result, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "query_id\tmap\tmrr\tp1"
    assert lines[1] == "q1\t0.500000\t0.500000\t0.000000"
    assert lines[2] == "q2\t1.000000\t1.000000\t1.000000"
    assert lines[3] == "all\t0.750000\t0.750000\t0.500000"
