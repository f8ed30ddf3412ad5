"""End-to-end pipeline runs against the mock archive."""

import gzip
import json
from pathlib import Path

import pytest

from brain.document_store import DocumentStore, store_documents
from tests.fixtures.pipeline import BASE_STAGES, Pipeline


def _aggregate(measures: Path) -> dict[str, float]:
    lines = measures.read_text(encoding="utf-8").splitlines()
    header = lines[0].split("\t")
    row = lines[-1].split("\t")
    assert row[0] == "all"
    return {name: float(value) for name, value in zip(header[1:], row[1:], strict=True)}


def _mapping_lines(path: Path) -> list[str]:
    with gzip.open(path, "rt", encoding="utf-8") as f:
        return f.read().splitlines()


def _comparable_files(work: Path) -> dict[str, bytes]:
    """Artifact bytes keyed by relative path, without scheduling-dependent files."""
    files = {}
    for path in sorted(work.rglob("*")):
        if not path.is_file() or path.name == "crawl.journal":
            continue
        relative = path.relative_to(work)
        if relative.parts[0] == "raw" and path.suffix == ".json":
            continue  # fetch metadata records wall-clock times
        files[relative.as_posix()] = path.read_bytes()
    return files


def test_full_pipeline(pipeline, capsys):
    """Test every stage on the fixture corpus, both ranking variants and the comparison."""
    pipeline.run_all()
    fixture = pipeline.fixture
    work = fixture.work_dir

    universe = (work / "universe.tsv").read_text(encoding="utf-8").splitlines()
    assert len([line for line in universe if line]) == 202
    assert len(_mapping_lines(work / "aol.id2wb.tsv.gz")) == 200

    title = _aggregate(fixture.run_dir / "title" / "measures.tsv")
    with_url = _aggregate(fixture.run_dir / "title_url" / "measures.tsv")
    assert title["map"] == pytest.approx(2 / 3, abs=1e-6)
    assert title["mrr"] == pytest.approx(2 / 3, abs=1e-6)
    assert title["p1"] == pytest.approx(0.5, abs=1e-6)
    assert with_url["map"] == pytest.approx(1.0)
    assert with_url["p1"] == pytest.approx(1.0)
    assert with_url["map"] > title["map"]

    results = (fixture.run_dir / "results.txt").read_text(encoding="utf-8")
    assert "(a) title" in results
    assert "(b) title_url" in results
    assert "delta vs title" in results

    # the first URL needed two retries, the takedown and the redirect are left out
    mapped = "\n".join(_mapping_lines(work / "aol.id2wb.tsv.gz"))
    assert fixture.docs[0].url in mapped
    assert "gone.example.org" not in mapped
    assert "moved.example.org" not in mapped

    test_rows = (fixture.root / "work" / "sessions" / "test.tsv").read_text(encoding="utf-8")
    assert test_rows.strip()


def test_rerun_is_noop(pipeline, capsys):
    """Test that unchanged inputs and configuration skip every stage."""
    pipeline.run_all()
    lookups = len(pipeline.app.state.archive.request_log)
    capsys.readouterr()

    for stage in BASE_STAGES:
        assert pipeline.run(stage) == 0
        assert f"{stage}: up to date" in capsys.readouterr().out
    assert len(pipeline.app.state.archive.request_log) == lookups


def test_force_reruns_stage(pipeline, capsys):
    """Test that --force ignores a current stamp."""
    assert pipeline.run("ingest") == 0
    assert pipeline.run("ingest", "--force") == 0
    out = capsys.readouterr().out
    assert "up to date" not in out
    assert out.count("ingest: 202 unique URLs") == 2


def test_runs_are_byte_identical(tmp_path):
    """Test that two independent runs produce the same artifacts."""
    first = Pipeline(tmp_path / "first")
    second = Pipeline(tmp_path / "second")
    first.run_all()
    second.run_all()

    a = _comparable_files(first.fixture.work_dir)
    b = _comparable_files(second.fixture.work_dir)
    assert sorted(a) == sorted(b)
    for name in a:
        assert a[name] == b[name], name


def test_interrupted_map_resumes(tmp_path):
    """Test that a partial crawl resumed later yields the uninterrupted mapping."""
    straight = Pipeline(tmp_path / "straight")
    resumed = Pipeline(tmp_path / "resumed")
    for pipeline in (straight, resumed):
        assert pipeline.run("ingest") == 0
    assert straight.run("map") == 0

    assert resumed.run("map", "--limit", "50") == 0
    partial = resumed.fixture.work_dir / "aol.id2wb.tsv.gz"
    assert len(_mapping_lines(partial)) < 200
    assert resumed.run("map") == 0

    expected = (straight.fixture.work_dir / "aol.id2wb.tsv.gz").read_bytes()
    assert partial.read_bytes() == expected


def test_incomplete_map_is_not_stamped(pipeline, capsys):
    """Test that a limited crawl leaves the stage runnable."""
    assert pipeline.run("ingest") == 0
    assert pipeline.run("map", "--limit", "10") == 0
    capsys.readouterr()
    assert pipeline.run("map", "--limit", "10") == 0
    assert "map: up to date" not in capsys.readouterr().out


def test_stage_out_of_order(pipeline, capsys):
    """Test that a stage with a missing upstream artifact exits with a data error."""
    for stage in ("ingest", "map", "fetch", "extract", "sessions", "index"):
        assert pipeline.run(stage) == 0
    capsys.readouterr()

    assert pipeline.run("eval") == 2
    err = capsys.readouterr().err
    assert "run `rerank` first" in err
    assert "during eval" in err


def test_index_before_sessions(pipeline, capsys):
    """Test that index names the sessions stage when test sessions are missing."""
    for stage in ("ingest", "map", "fetch", "extract"):
        assert pipeline.run(stage) == 0
    assert pipeline.run("index") == 2
    assert "run `sessions` first" in capsys.readouterr().err


def test_dry_run(pipeline, capsys):
    """Test that --dry-run prints the plan and writes nothing."""
    assert pipeline.run("ingest", "--dry-run") == 0
    out = capsys.readouterr().out
    assert "ingest:" in out
    assert "would run" in out
    assert not (pipeline.fixture.work_dir / "universe.tsv").exists()


def test_unknown_flag_is_usage_error(pipeline, capsys):
    """Test that argument errors exit 1."""
    assert pipeline.run("ingest", "--no-such-flag") == 1
    assert "Usage error" in capsys.readouterr().err


def test_archive_unreachable(tmp_path, capsys):
    """Test that a crawl whose lookups keep failing exits 3 and resumes later."""
    # one initial attempt plus three retries per run
    flaky = {f"http://site{i}.org/page{i}": 4 for i in range(3)}
    pipeline = Pipeline(tmp_path / "flaky", lookup_failures=flaky)
    assert pipeline.run("ingest") == 0
    assert pipeline.run("map") == 3
    assert "Archive requests exhausted" in capsys.readouterr().err

    # the scripted failures are used up, so a second pass maps the deferred URLs
    assert pipeline.run("map") == 0
    assert len(_mapping_lines(pipeline.fixture.work_dir / "aol.id2wb.tsv.gz")) == 200


def test_diff_against_other_version(pipeline, tmp_path, capsys):
    """Test corpus comparison and that a repeated comparison is a no-op."""
    for stage in ("ingest", "map", "fetch", "extract"):
        assert pipeline.run(stage) == 0

    docs = list(DocumentStore(pipeline.fixture.work_dir / "docs").scan())
    other = []
    for i, doc in enumerate(docs[20:]):
        other.append(doc.model_copy(update={"title": "changed page"}) if i < 30 else doc)
    other_dir = tmp_path / "other"
    store_documents(other, other_dir)

    args = ("--other-store", str(other_dir), "--name-a", "ours", "--name-b", "theirs", "--sample", "10")
    assert pipeline.run("diff", *args) == 0
    diff_dir = pipeline.fixture.work_dir / "diff"
    report = (diff_dir / "set_report.tsv").read_text(encoding="utf-8").splitlines()
    counts = {row.split("\t")[0]: int(row.split("\t")[1]) for row in report[1:]}
    assert counts["ours"] == 200
    assert counts["theirs"] == 180
    assert counts["ours \\ theirs"] == 20
    assert counts["theirs \\ ours"] == 0
    assert len((diff_dir / "review.tsv").read_text(encoding="utf-8").splitlines()) == 11

    capsys.readouterr()
    assert pipeline.run("diff", *args) == 0
    assert "diff: up to date" in capsys.readouterr().out


def test_diff_needs_other_store(pipeline, capsys):
    for stage in ("ingest", "map", "fetch", "extract"):
        assert pipeline.run(stage) == 0
    assert pipeline.run("diff") == 1
    assert "--other-store" in capsys.readouterr().err


def test_significance_needs_two_runs(pipeline, capsys):
    for stage in BASE_STAGES:
        assert pipeline.run(stage) == 0
    assert pipeline.run("significance") == 1
    assert "at least two runs" in capsys.readouterr().err


def test_fetch_rebuilds_from_distributed_mapping(tmp_path):
    """Test that fetch reconstructs raw payloads from a mapping file alone."""
    origin = Pipeline(tmp_path / "origin")
    assert origin.run("ingest") == 0
    assert origin.run("map") == 0

    rebuilt = Pipeline(tmp_path / "rebuilt")
    mapping = rebuilt.fixture.work_dir / "aol.id2wb.tsv.gz"
    mapping.parent.mkdir(parents=True, exist_ok=True)
    mapping.write_bytes((origin.fixture.work_dir / "aol.id2wb.tsv.gz").read_bytes())
    assert rebuilt.run("fetch") == 0
    assert rebuilt.run("extract") == 0

    ours = list(DocumentStore(rebuilt.fixture.work_dir / "docs").scan())
    assert len(ours) == 200
    doc = rebuilt.fixture.docs[-1]
    assert any(record.url == doc.url and record.title == doc.title for record in ours)


def test_fetch_revalidate_drops_takedowns(pipeline):
    """Test that revalidation removes documents the archive no longer serves."""
    for stage in ("ingest", "map", "fetch"):
        assert pipeline.run(stage) == 0
    gone = pipeline.fixture.docs[5].url
    del pipeline.app.state.archive.captures[gone]

    assert pipeline.run("fetch", "--revalidate", "--force") == 0
    mapped = _mapping_lines(pipeline.fixture.work_dir / "aol.id2wb.tsv.gz")
    assert len(mapped) == 199
    assert all(line.split("\t")[1] != gone for line in mapped)


def test_titles_from_other_version(pipeline, tmp_path, capsys):
    """Test ranking our sessions against another version's titles, blanks counted."""
    for stage in ("ingest", "map", "fetch", "extract", "sessions"):
        assert pipeline.run(stage) == 0
    docs = list(DocumentStore(pipeline.fixture.work_dir / "docs").scan())
    other_dir = tmp_path / "other"
    store_documents(docs[20:], other_dir)

    overlay = ("--titles-from", str(other_dir))
    for stage in ("index", "rerank", "eval"):
        assert pipeline.run(stage, *overlay) == 0, stage
    variant = pipeline.fixture.run_dir / "title_overlay"
    report = json.loads((variant / "overlay.json").read_text(encoding="utf-8"))
    assert report["documents"] == 200
    assert report["missing_from_other"] == 20
    assert report["blank_fraction"] == pytest.approx(0.1)
    assert (variant / "measures.tsv").is_file()
    assert "10.0% blank" in capsys.readouterr().out

    assert pipeline.run("index", *overlay) == 0
    assert "index: up to date" in capsys.readouterr().out
    assert pipeline.run("index", "--titles-from", str(tmp_path / "absent")) == 2
    assert "run `extract` first" in capsys.readouterr().err


def test_sessions_from_another_directory(pipeline, tmp_path, capsys):
    """Test that index and rerank read test sessions from --session-dir."""
    for stage in ("ingest", "map", "fetch", "extract", "sessions"):
        assert pipeline.run(stage) == 0
    external = tmp_path / "external_sessions"
    assert pipeline.run("index", "--session-dir", str(external)) == 2
    assert "run `sessions` first" in capsys.readouterr().err

    external.mkdir()
    test_split = (pipeline.fixture.work_dir / "sessions" / "test.tsv").read_text(encoding="utf-8")
    (external / "test.tsv").write_text(test_split, encoding="utf-8")
    for stage in ("index", "rerank", "eval"):
        assert pipeline.run(stage, "--session-dir", str(external)) == 0, stage
    assert _aggregate(pipeline.fixture.run_dir / "title" / "measures.tsv")["map"] == pytest.approx(2 / 3, abs=1e-6)
