"""Unit tests for the inverted index and BM25 scoring."""

import math
import random

import pytest

from brain.ranking.bm25 import Bm25Params, bm25_score, idf, rerank, retrieve
from brain.ranking.index import InvertedIndex, build_index, load_index, save_index
from core.errors import DataError, DocumentNotFoundError, IndexFormatError

DOCS = [
    ("d1", ["a", "b"]),
    ("d2", ["a"]),
    ("d3", ["c", "c", "d"]),
    ("d4", ["b", "d", "e", "e"]),
    ("d5", ["a", "e"]),
]


def test_build_index():
    index = build_index(DOCS)
    assert index.doc_count == 5
    assert index.avg_doc_length == pytest.approx(12 / 5)
    assert index.df("a") == 3
    assert index.tf("c", "d3") == 2
    assert index.tf("c", "d1") == 0
    assert index.postings["e"] == [("d4", 2), ("d5", 1)]
    assert "d2" in index
    assert "d9" not in index


def test_duplicate_doc_id_rejected():
    with pytest.raises(DataError):
        build_index([("d1", ["a"]), ("d1", ["b"])])


def test_sharded_build_equals_single_build(tmp_path):
    """Test that merging per-shard indexes gives the same index and bytes."""
    single = build_index(DOCS)
    merged = InvertedIndex.merge([build_index(DOCS[3:]), build_index(DOCS[:1]), build_index(DOCS[1:3])])
    assert merged == single

    save_index(single, tmp_path / "single.idx")
    save_index(merged, tmp_path / "merged.idx")
    assert (tmp_path / "single.idx").read_bytes() == (tmp_path / "merged.idx").read_bytes()


def test_merge_rejects_overlapping_shards():
    with pytest.raises(DataError, match="d2"):
        InvertedIndex.merge([build_index(DOCS[:2]), build_index(DOCS[1:3])])


def test_save_and_load(tmp_path):
    index = build_index(DOCS)
    path = tmp_path / "nested" / "bm25.idx"
    save_index(index, path)
    loaded = load_index(path)
    assert loaded == index
    assert loaded.tf("e", "d4") == 2


@pytest.mark.parametrize(
    "mangle,message",
    [
        (lambda data: b"NOTANIDX" + data[8:], "not an index"),
        (lambda data: data[:8] + (9).to_bytes(4, "little") + data[12:], "version 9"),
        (lambda data: data[:-3], "truncated"),
        (lambda data: data + b"\0", "trailing"),
    ],
)
def test_load_rejects_damaged_files(tmp_path, mangle, message):
    path = tmp_path / "bm25.idx"
    save_index(build_index(DOCS), path)
    path.write_bytes(mangle(path.read_bytes()))
    with pytest.raises(IndexFormatError, match=message):
        load_index(path)


def test_idf_variants():
    """Test the floored and the always-positive idf forms."""
    index = build_index(DOCS)
    # a is in 3 of 5 documents
    assert idf("a", index) == 0.0
    assert idf("a", index, "lucene") == pytest.approx(math.log1p(2.5 / 3.5))
    assert idf("c", index) == pytest.approx(math.log(4.5 / 1.5))
    assert idf("unseen", index) == pytest.approx(math.log(5.5 / 0.5))


def test_bm25_score_matches_formula():
    index = build_index(DOCS)
    params = Bm25Params(k1=1.2, b=0.75)
    norm = 1.2 * (1 - 0.75 + 0.75 * 3 / (12 / 5))
    expected = math.log(4.5 / 1.5) * 2 * 2.2 / (2 + norm) + math.log(3.5 / 2.5) * 1 * 2.2 / (1 + norm)
    assert bm25_score(["c", "d", "c"], "d3", index, params) == pytest.approx(expected)
    assert bm25_score(["zzz"], "d3", index, params) == 0.0
    with pytest.raises(DocumentNotFoundError):
        bm25_score(["a"], "d9", index, params)


def test_params_tag():
    assert Bm25Params().tag() == "bm25-robertson-k1=1.2-b=0.75"
    assert Bm25Params(k1=0.9, b=0.4, idf="lucene").tag("title") == "title-lucene-k1=0.9-b=0.4"


def test_rerank_breaks_ties_by_doc_id_descending():
    """Test equal scores rank the larger doc_id first."""
    filler = [(f"x{i}", ["other"]) for i in range(4, 9)]
    index = build_index([("x1", ["q"]), ("x3", ["q"]), ("x2", ["q"]), *filler])
    run = rerank("s/0", ["q"], ["x1", "x2", "x3", "x4", "x2"], index, Bm25Params())
    assert [entry.doc_id for entry in run] == ["x3", "x2", "x1", "x4"]
    assert [entry.rank for entry in run] == [1, 2, 3, 4]
    assert run[-1].score == 0.0
    assert {entry.tag for entry in run} == {"bm25-robertson-k1=1.2-b=0.75"}


def test_retrieve_keeps_positive_scores_only():
    index = build_index(DOCS)
    assert retrieve("q", ["a"], index, Bm25Params(), k=10) == []
    lucene = retrieve("q", ["a"], index, Bm25Params(idf="lucene"), k=2)
    # d2 is the shortest document containing a
    assert [entry.doc_id for entry in lucene] == ["d2", "d5"]
    top = retrieve("q", ["e", "c"], index, Bm25Params(), k=10, tag="check")
    assert [entry.doc_id for entry in top] == ["d3", "d4", "d5"]
    assert top[0].tag == "check"


TOY = [("d1", ["jaguar", "car"]), ("d2", ["jaguar", "jaguar", "speed"]), ("d3", ["lion"])]


def _random_corpus(rng: random.Random, docs: int, vocab: int = 30) -> list[tuple[str, list[str]]]:
    words = [f"w{i}" for i in range(vocab)]
    return [(f"doc{i:04d}", rng.choices(words, k=rng.randint(1, 12))) for i in range(docs)]


def test_toy_corpus_statistics():
    index = build_index([("d1", ["a", "b"]), ("d2", ["b", "b"])])
    assert (index.df("a"), index.df("b"), index.tf("b", "d2")) == (1, 2, 2)
    assert index.avg_doc_length == 2
    empty = build_index([])
    assert empty.doc_count == 0
    assert empty.avg_doc_length == 0.0


def test_toy_corpus_ranking():
    """Test hand-derived scores for the jaguar corpus under both idf forms."""
    index = build_index(TOY)
    lucene = Bm25Params(idf="lucene")
    idf_jaguar = math.log1p(1.5 / 2.5)
    assert bm25_score(["jaguar"], "d1", index, lucene) == pytest.approx(idf_jaguar * 2.2 / (1 + 1.2), abs=1e-6)
    assert bm25_score(["jaguar"], "d2", index, lucene) == pytest.approx(
        idf_jaguar * 2 * 2.2 / (2 + 1.2 * (0.25 + 0.75 * 1.5)), abs=1e-6
    )
    assert bm25_score(["jaguar"], "d3", index, lucene) == 0.0
    assert [e.doc_id for e in rerank("q", ["jaguar"], ["d1", "d2", "d3"], index, lucene)] == ["d2", "d1", "d3"]

    # jaguar is in two of three documents, so the floored form gives it no weight
    robertson = rerank("q", ["jaguar"], ["d1", "d2", "d3"], index, Bm25Params())
    assert {e.score for e in robertson} == {0.0}


def test_rerank_edge_cases():
    index = build_index(TOY)
    assert rerank("q", ["jaguar"], [], index, Bm25Params()) == []
    single = rerank("q", ["nothing"], ["d3"], index, Bm25Params())
    assert [(e.doc_id, e.rank) for e in single] == [("d3", 1)]


def test_sharded_build_over_random_documents():
    rng = random.Random(21)
    docs = _random_corpus(rng, 1000)
    single = build_index(docs)
    shuffled = rng.sample(docs, len(docs))
    shards = [build_index(shuffled[i : i + 137]) for i in range(0, len(shuffled), 137)]
    merged = InvertedIndex.merge(shards)
    assert merged == single
    assert sum(single.doc_lengths.values()) == sum(tf for plist in single.postings.values() for _, tf in plist)


@pytest.mark.parametrize("variant", ["robertson", "lucene"])
def test_adding_a_query_term_never_lowers_the_score(variant):
    """Test monotonicity over 500 random single-occurrence additions."""
    rng = random.Random(13)
    params = Bm25Params(idf=variant)
    for _ in range(500):
        docs = _random_corpus(rng, rng.randint(2, 8), vocab=6)
        doc_id, tokens = rng.choice(docs)
        term = f"w{rng.randrange(6)}"
        before = bm25_score([term], doc_id, build_index(docs), params)
        grown = [(d, [*t, term] if d == doc_id else t) for d, t in docs]
        after = bm25_score([term], doc_id, build_index(grown), params)
        assert after >= before - 1e-12


def test_uniform_length_scaling_keeps_ranking():
    rng = random.Random(17)
    params = Bm25Params(idf="lucene")
    for _ in range(50):
        docs = _random_corpus(rng, 10, vocab=8)
        doubled = [(doc_id, tokens * 2) for doc_id, tokens in docs]
        query = [f"w{rng.randrange(8)}"]
        candidates = [doc_id for doc_id, _ in docs]
        original = rerank("q", query, candidates, build_index(docs), params)
        scaled = rerank("q", query, candidates, build_index(doubled), params)
        before = {e.doc_id: e.score for e in original}
        # the doubled corpus orders documents the way the original scores do
        for higher, lower in zip(scaled, scaled[1:], strict=False):
            assert before[higher.doc_id] >= before[lower.doc_id] - 1e-9
