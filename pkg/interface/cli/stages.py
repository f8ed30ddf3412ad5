"""Pipeline stages: artifact layout, upstream checks and stage bodies.

Every stage declares the artifacts it reads (with the subcommand producing
each) and one primary output that carries the provenance stamp. A stage whose
stamp matches its current inputs and configuration is a no-op.
"""

from __future__ import annotations

import argparse
import asyncio
import json
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path

import httpx
from pydantic import BaseModel

from brain.candidates import build_session_candidates
from brain.corpus_diff import (
    CorpusKeySet,
    content_page_share,
    jaccard_histogram,
    overlay_titles,
    sample_divergent,
    set_report,
    title_pairs,
    write_histogram,
    write_review_sheet,
)
from brain.document_store import DATA_FILE, DocumentStore, export_tsv, store_documents
from brain.html_extractor import corpus_statistics, extract_documents
from brain.language_id import corpus_language_report, language_table, load_bundled_profiles, query_language_report
from brain.ranking.bm25 import rerank
from brain.ranking.evaluation import MEASURES, evaluate, write_measures
from brain.ranking.index import InvertedIndex, build_index, load_index, save_index
from brain.ranking.reporting import render_results_table
from brain.ranking.significance import significance_matrix, write_significance
from brain.ranking.trec_files import read_qrels, read_run, write_qrels, write_run
from brain.schemas import ExtractionReport
from brain.session_builder import (
    SPLITS,
    ClickMappingReport,
    dataset_stats,
    filter_sessions,
    read_sessions,
    records_to_session_queries,
    segment,
    split_by_date,
    write_sessions,
)
from brain.tokenizer import document_text, tokenize
from core.config import Settings
from core.errors import DataError, MissingArtifactError, NetworkExhaustedError, UsageError
from core.logging import get_logger, stage_context
from core.observability import record_event
from ingestion.archive_client import ArchiveClient, FetchPolicy
from ingestion.crawl_journal import CrawlJournal, Disposition, resume_crawl
from ingestion.crawler import Crawler
from ingestion.file_discovery import discover_log_files
from ingestion.log_parser import LogReadReport, read_log_files
from ingestion.mapping_file import mapping_by_url, read_mapping, snapshot_date_distribution, write_mapping
from ingestion.raw_store import RawStore
from ingestion.url_universe import build_url_universe, read_universe, universe_stats, write_universe
from interface.cli.stamps import build_stamp, is_current, write_stamp

logger = get_logger(__name__)

SYSTEM_RUN = "bm25.run"


class Layout:
    """Where every artifact lives, derived from the settings."""

    def __init__(self, settings: Settings):
        self.settings = settings
        work = settings.WORK_DIR
        self.log_dir = settings.LOG_DIR
        self.universe = work / "universe.tsv"
        self.universe_stats = work / "universe_stats.json"
        self.journal = work / "crawl.journal"
        self.raw_dir = work / "raw"
        self.mapping = settings.MAPPING_FILE
        self.snapshot_dates = work / "snapshot_dates.json"
        self.doc_store = settings.DOC_STORE
        self.doc_data = settings.DOC_STORE / DATA_FILE
        self.extraction_report = work / "extraction.json"
        self.languages = work / "languages.tsv"
        self.diff_dir = work / "diff"
        self.export = work / "documents.tsv"
        self.session_stats = settings.SESSION_DIR / "stats.tsv"
        self.candidates = settings.RUN_DIR / "candidates.run"
        self.qrels = settings.RUN_DIR / "qrels.txt"
        self.significance = settings.RUN_DIR / "significance.tsv"
        self.results = settings.RUN_DIR / "results.txt"

    def sessions(self, split: str) -> Path:
        return self.settings.SESSION_DIR / f"{split}.tsv"

    @property
    def variant(self) -> str:
        name = "title"
        if self.settings.INCLUDE_URL:
            name += "_url"
        if self.settings.INCLUDE_BODY:
            name += "_body"
        if self.settings.TITLES_FROM is not None:
            name += "_overlay"
        return name

    @property
    def variant_dir(self) -> Path:
        return self.settings.RUN_DIR / self.variant

    @property
    def index(self) -> Path:
        return self.variant_dir / "index.bin"

    @property
    def run(self) -> Path:
        return self.variant_dir / SYSTEM_RUN

    @property
    def measures(self) -> Path:
        return self.variant_dir / "measures.tsv"

    @property
    def overlay_report(self) -> Path:
        return self.variant_dir / "overlay.json"

    def system_runs(self) -> list[Path]:
        """Reranked runs of every variant evaluated so far, in name order."""
        if not self.settings.RUN_DIR.is_dir():
            return []
        return sorted(path / SYSTEM_RUN for path in self.settings.RUN_DIR.iterdir() if (path / SYSTEM_RUN).is_file())


@dataclass(frozen=True, slots=True)
class Input:
    path: Path
    producer: str
    pattern: str = "*"


@dataclass(slots=True)
class StageContext:
    settings: Settings
    args: argparse.Namespace
    transport: httpx.AsyncBaseTransport | None = None
    layout: Layout = field(init=False)

    def __post_init__(self) -> None:
        self.layout = Layout(self.settings)

    def option(self, name: str, default=None):
        return getattr(self.args, name, default)


@dataclass(frozen=True, slots=True)
class Stage:
    name: str
    help: str
    inputs: Callable[[Layout], list[Input]]
    output: Callable[[Layout], Path]
    body: Callable[[StageContext], bool | None]


def _write_json(model: BaseModel | dict, path: Path) -> None:
    data = model.model_dump(mode="json") if isinstance(model, BaseModel) else model
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _log_inputs(layout: Layout) -> list[Input]:
    files = discover_log_files(layout.log_dir) if layout.log_dir.is_dir() else []
    if not files:
        raise UsageError(f"No query log files found in {layout.log_dir}")
    return [Input(path, "ingest") for path in files]


def _fetch_policy(ctx: StageContext) -> FetchPolicy:
    policy = ctx.settings.fetch_policy()
    if ctx.option("jobs") is not None:
        policy = policy.model_copy(update={"max_concurrency": min(policy.max_concurrency, ctx.settings.JOBS)})
    return policy


# ingest


def run_ingest(ctx: StageContext) -> None:
    layout = ctx.layout
    report = LogReadReport()
    universe = build_url_universe(read_log_files(discover_log_files(layout.log_dir), report))
    write_universe(universe, layout.universe)
    stats = universe_stats(universe)
    _write_json(
        {
            **stats.model_dump(mode="json"),
            "log_lines": report.lines,
            "log_records": report.records,
            "log_errors": report.error_count,
            "rejected_urls": universe.rejected,
        },
        layout.universe_stats,
    )
    print(f"ingest: {stats.unique_count} unique URLs, {report.error_count} malformed log lines")


# map / fetch


async def _crawl(ctx: StageContext, urls: list[str]) -> tuple[Crawler, int, int]:
    layout = ctx.layout
    journal = CrawlJournal(layout.journal)
    async with ArchiveClient(
        ctx.settings.ARCHIVE_ENDPOINT, _fetch_policy(ctx), transport=ctx.transport, seed=ctx.settings.SEED
    ) as client:
        crawler = Crawler(client, journal, RawStore(layout.raw_dir))
        summary = await crawler.run(urls, limit=ctx.option("limit"))
    pending = len(resume_crawl(journal, urls).pending)
    return crawler, summary.deferred, pending


def run_map(ctx: StageContext) -> bool:
    layout = ctx.layout
    urls = read_universe(layout.universe).sorted_urls()
    crawler, deferred, pending = asyncio.run(_crawl(ctx, urls))
    rows = crawler.emit_mapping(urls)
    write_mapping(rows, layout.mapping)
    _write_json(snapshot_date_distribution(rows), layout.snapshot_dates)
    print(f"map: {len(rows)} documents mapped, {pending} URLs pending")
    if deferred:
        raise NetworkExhaustedError(f"{deferred} URLs deferred after repeated archive failures; rerun `map` to retry them")
    return pending == 0


async def _refetch(ctx: StageContext, rows) -> tuple[int, list[str], list[str], int]:
    layout = ctx.layout
    journal = CrawlJournal(layout.journal)
    async with ArchiveClient(
        ctx.settings.ARCHIVE_ENDPOINT, _fetch_policy(ctx), transport=ctx.transport, seed=ctx.settings.SEED
    ) as client:
        crawler = Crawler(client, journal, RawStore(layout.raw_dir))
        summary = await crawler.refetch(rows)
        deleted = await crawler.revalidate(rows) if ctx.option("revalidate") else 0
    return summary.fetched, summary.deferred, summary.failed, deleted


def run_fetch(ctx: StageContext) -> None:
    """Rebuild raw payloads from the mapping file, optionally re-checking availability."""
    layout = ctx.layout
    rows = read_mapping(layout.mapping)
    fetched, deferred, failed, deleted = asyncio.run(_refetch(ctx, rows))
    if deleted:
        latest = CrawlJournal(layout.journal).dispositions()
        kept = [
            row
            for row in rows
            if not (row.original_url in latest and latest[row.original_url].disposition is Disposition.DELETED)
        ]
        write_mapping(kept, layout.mapping)
        record_event("mapping_revalidated", removed=str(deleted))
    print(f"fetch: {fetched} payloads fetched, {len(failed)} gone, {deleted} no longer archived")
    if deferred:
        raise NetworkExhaustedError(f"{len(deferred)} snapshots deferred after repeated archive failures; rerun `fetch`")


# extract / langid / export


def run_extract(ctx: StageContext) -> None:
    layout = ctx.layout
    rows = read_mapping(layout.mapping)
    report = ExtractionReport()
    stored = store_documents(
        extract_documents(RawStore(layout.raw_dir), rows, ctx.settings.MAX_DOC_TOKENS, report),
        layout.doc_store,
        ctx.settings.STORE_BLOCK_SIZE,
    )
    statistics = corpus_statistics(DocumentStore(layout.doc_store).scan())
    _write_json(
        {
            "extraction": report.model_dump(mode="json"),
            "excluded_fraction": report.excluded_fraction,
            "statistics": statistics.model_dump(mode="json"),
        },
        layout.extraction_report,
    )
    print(f"extract: {stored} documents stored, {report.excluded} excluded, {report.truncated} truncated")


def run_langid(ctx: StageContext) -> None:
    layout = ctx.layout
    profiles = load_bundled_profiles()
    documents = language_table(corpus_language_report(DocumentStore(layout.doc_store).scan(), profiles))
    queries = {record.query_text for record in read_log_files(discover_log_files(layout.log_dir))}
    query_rows = language_table(query_language_report(sorted(queries), profiles))
    layout.languages.parent.mkdir(parents=True, exist_ok=True)
    with open(layout.languages, "w", encoding="utf-8", newline="\n") as f:
        f.write("column\tlanguage\tcount\tpercentage\n")
        for column, rows in (("documents", documents), ("queries", query_rows)):
            for row in rows:
                f.write(f"{column}\t{row.language}\t{row.count}\t{row.percentage:.2f}\n")
    print(f"langid: {len(documents)} document languages, {len(query_rows)} query languages")


def run_export(ctx: StageContext) -> None:
    count = export_tsv(DocumentStore(ctx.layout.doc_store), ctx.layout.export)
    print(f"export: {count} documents written to {ctx.layout.export}")


# diff


def _other_store(args: argparse.Namespace) -> Path:
    other = getattr(args, "other_store", None)
    if other is None:
        raise UsageError("diff needs --other-store pointing at the document store of the other corpus version")
    return Path(other)


def run_diff(ctx: StageContext) -> None:
    layout = ctx.layout
    universe_size = len(read_universe(layout.universe))
    a_docs = {doc.doc_id: doc for doc in DocumentStore(layout.doc_store).scan()}
    b_docs = {doc.doc_id: doc for doc in DocumentStore(_other_store(ctx.args)).scan()}
    a = CorpusKeySet.of(ctx.option("name_a") or "A", a_docs)
    b = CorpusKeySet.of(ctx.option("name_b") or "B", b_docs)
    try:
        rows = set_report(a, b, universe_size)
    except ValueError as e:
        raise DataError(str(e)) from e

    out = layout.diff_dir
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "set_report.tsv", "w", encoding="utf-8", newline="\n") as f:
        f.write("set\tcount\tpercentage\n")
        for row in rows:
            f.write(f"{row.label}\t{row.count}\t{row.percentage:.2f}\n")

    pairs = title_pairs(a_docs, b_docs)
    histogram, summary = jaccard_histogram((tokenize(x.title), tokenize(y.title)) for _, x, y in pairs)
    write_histogram(histogram, out / "histogram.tsv")
    _write_json(
        {
            "histogram_population": "doc_ids present in both versions",
            "histogram": summary.model_dump(mode="json"),
            "content_page_share_a_only": content_page_share(a_docs[d].url for d in a.keys - b.keys),
            "content_page_share_b_only": content_page_share(b_docs[d].url for d in b.keys - a.keys),
        },
        out / "summary.json",
    )
    k = ctx.option("sample", 100)
    try:
        sample = sample_divergent(pairs, k, ctx.settings.SEED)
    except ValueError as e:
        raise UsageError(f"{e}; lower --sample") from e
    write_review_sheet(sample, out / "review.tsv")
    print(f"diff: {len(pairs)} shared documents, perfect title overlap {summary.perfect_fraction:.1%}")


# sessions


def run_sessions(ctx: StageContext) -> None:
    layout = ctx.layout
    settings = ctx.settings
    try:
        spec = settings.split_spec()
    except ValueError as e:
        raise UsageError(str(e)) from e

    doc_ids_by_url = {url: row.doc_id for url, row in mapping_by_url(read_mapping(layout.mapping)).items()}
    report = ClickMappingReport()
    items = list(records_to_session_queries(read_log_files(discover_log_files(layout.log_dir)), doc_ids_by_url, report))
    # files are user-grouped individually; a stable sort keeps click rows of one query together
    items.sort(key=lambda item: (item[0], item[1].query_time))
    sessions = filter_sessions(
        segment(items, settings.GAP_THRESHOLD),
        min_queries=settings.MIN_QUERIES,
        require_click=settings.REQUIRE_CLICK,
    )
    result = split_by_date(sessions, spec)
    for split in SPLITS:
        write_sessions(result[split], layout.sessions(split))

    rows = dataset_stats(result.splits)
    with open(layout.session_stats, "w", encoding="utf-8", newline="\n") as f:
        f.write(
            f"# gap_threshold={settings.GAP_THRESHOLD:g}s gap_from=previous_record "
            f"consecutive_duplicates=merged_at_latest_time min_queries={settings.MIN_QUERIES}\n"
        )
        f.write("split\tsessions\tqueries\tavg_queries_per_session\n")
        for row in rows:
            f.write(f"{row.split}\t{row.sessions}\t{row.queries}\t{row.avg_queries_per_session:.2f}\n")
    print(
        f"sessions: {len(result.all_sessions())} kept, {result.discarded} outside the split ranges, "
        f"{report.clicks_outside_corpus} clicks outside the corpus"
    )


# index / rerank


def _build_variant_index(
    ctx: StageContext, include_url: bool, include_body: bool, titles: dict[str, str] | None = None
) -> InvertedIndex:
    """Index the store, sharded round-robin over ``JOBS`` and merged.

    ``titles`` replaces each document's own title (blank when absent).
    """
    shards: list[list[tuple[str, list[str]]]] = [[] for _ in range(ctx.settings.JOBS)]
    for ordinal, doc in enumerate(DocumentStore(ctx.layout.doc_store).scan()):
        if titles is not None:
            doc = doc.model_copy(update={"title": titles.get(doc.doc_id, "")})
        shards[ordinal % len(shards)].append((doc.doc_id, document_text(doc, include_url, include_body)))
    return InvertedIndex.merge(build_index(shard) for shard in shards)


def _overlaid_titles(ctx: StageContext) -> dict[str, str] | None:
    """Titles from the ``TITLES_FROM`` store for every document of ours, with the blank share recorded."""
    other = ctx.settings.TITLES_FROM
    if other is None:
        return None
    replacement = {doc.doc_id: doc for doc in DocumentStore(other).scan()}
    doc_ids = [doc.doc_id for doc in DocumentStore(ctx.layout.doc_store).scan()]
    titles, blank_fraction = overlay_titles(doc_ids, replacement)
    _write_json(
        {
            "titles_from": str(other),
            "documents": len(titles),
            "missing_from_other": sum(1 for doc_id in doc_ids if doc_id not in replacement),
            "blank_fraction": blank_fraction,
        },
        ctx.layout.overlay_report,
    )
    print(f"index: titles taken from {other}, {blank_fraction:.1%} blank")
    return titles


def _index_inputs(layout: Layout) -> list[Input]:
    inputs = [Input(layout.doc_data, "extract"), Input(layout.sessions("test"), "sessions")]
    if layout.settings.TITLES_FROM is not None:
        inputs.append(Input(layout.settings.TITLES_FROM / DATA_FILE, "extract"))
    return inputs


def run_index(ctx: StageContext) -> None:
    layout = ctx.layout
    settings = ctx.settings
    index = _build_variant_index(ctx, settings.INCLUDE_URL, settings.INCLUDE_BODY, _overlaid_titles(ctx))
    save_index(index, layout.index)

    # one candidate pool for every variant, so all systems rerank the same documents
    pool_index = _build_variant_index(ctx, include_url=True, include_body=True)
    report = build_session_candidates(
        read_sessions(layout.sessions("test")), pool_index, settings.CANDIDATE_DEPTH, settings.bm25_params()
    )
    write_run(report.run, layout.candidates)
    write_qrels(report.qrels, layout.qrels)
    print(
        f"index: {index.doc_count} documents in {layout.variant}, "
        f"{len(report.candidate_sets)} test queries with candidates ({report.skipped} skipped)"
    )


def run_rerank(ctx: StageContext) -> None:
    layout = ctx.layout
    params = ctx.settings.bm25_params()
    index = load_index(layout.index)
    queries = {
        session.query_id(i): query.query_text
        for session in read_sessions(layout.sessions("test"))
        for i, query in enumerate(session.queries)
    }
    candidates: dict[str, list[str]] = {}
    for entry in read_run(layout.candidates):
        candidates.setdefault(entry.query_id, []).append(entry.doc_id)

    unknown = set(candidates) - set(queries)
    if unknown:
        raise DataError(f"{len(unknown)} candidate queries are missing from the test sessions; rerun `index`")
    run = []
    for query_id in sorted(candidates):
        run.extend(rerank(query_id, tokenize(queries[query_id]), candidates[query_id], index, params, tag=params.tag()))
    write_run(run, layout.run)
    print(f"rerank: {len(candidates)} queries reranked with {params.tag()} on {layout.variant}")


# eval / significance


def run_eval(ctx: StageContext) -> None:
    layout = ctx.layout
    result = evaluate(read_run(layout.run), read_qrels(layout.qrels), name=layout.variant)
    write_measures(result, layout.measures)
    scores = " ".join(f"{m}={result.aggregate[m]:.4f}" for m in MEASURES)
    print(f"eval: {layout.variant} {scores} over {len(result.per_query)} queries")


def _external_runs(ctx: StageContext) -> list[tuple[str, Path]]:
    runs = []
    for spec in ctx.option("run") or ():
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise UsageError(f"--run expects NAME=PATH, got {spec!r}")
        runs.append((name, Path(path)))
    return runs


def _significance_inputs(layout: Layout) -> list[Input]:
    return [Input(layout.qrels, "index"), *(Input(path, "rerank") for path in layout.system_runs())]


def run_significance(ctx: StageContext) -> None:
    layout = ctx.layout
    qrels = read_qrels(layout.qrels)
    systems = [evaluate(read_run(path), qrels, name=path.parent.name) for path in layout.system_runs()]
    for name, path in _external_runs(ctx):
        if not path.is_file():
            raise UsageError(f"Run file not found: {path}")
        systems.append(evaluate(read_run(path), qrels, name=name))
    if len(systems) < 2:
        raise UsageError("significance needs at least two runs; `rerank` with and without --include-url first")

    alpha = ctx.settings.SIGNIFICANCE_ALPHA
    matrices = [significance_matrix(systems, alpha=alpha, measure=measure) for measure in MEASURES]
    write_significance(matrices, layout.significance)
    baseline = "title" if any(system.name == "title" for system in systems) else systems[0].name
    table = render_results_table(systems, matrices, baseline=baseline)
    layout.results.write_text(table + "\n", encoding="utf-8")
    print(table)


STAGES: dict[str, Stage] = {
    stage.name: stage
    for stage in (
        Stage("ingest", "Parse query logs into the clicked-URL universe", _log_inputs, lambda lay: lay.universe, run_ingest),
        Stage(
            "map",
            "Resolve archive snapshots for the universe and write the mapping file",
            lambda lay: [Input(lay.universe, "ingest")],
            lambda lay: lay.mapping,
            run_map,
        ),
        Stage(
            "fetch",
            "Download raw payloads named by the mapping file",
            lambda lay: [Input(lay.mapping, "map")],
            lambda lay: lay.raw_dir,
            run_fetch,
        ),
        Stage(
            "extract",
            "Extract titles and bodies into the document store",
            lambda lay: [Input(lay.mapping, "map"), Input(lay.raw_dir, "fetch", "*.gz")],
            lambda lay: lay.doc_data,
            run_extract,
        ),
        Stage(
            "langid",
            "Report document and query languages",
            lambda lay: [Input(lay.doc_data, "extract"), *_log_inputs(lay)],
            lambda lay: lay.languages,
            run_langid,
        ),
        Stage(
            "diff",
            "Compare this corpus with another version",
            lambda lay: [Input(lay.doc_data, "extract"), Input(lay.universe, "ingest")],
            lambda lay: lay.diff_dir / "set_report.tsv",
            run_diff,
        ),
        Stage(
            "sessions",
            "Segment, filter and split query sessions",
            lambda lay: [Input(lay.mapping, "map"), *_log_inputs(lay)],
            lambda lay: lay.session_stats,
            run_sessions,
        ),
        Stage(
            "index",
            "Build the ranking index and test-split candidate sets",
            _index_inputs,
            lambda lay: lay.index,
            run_index,
        ),
        Stage(
            "rerank",
            "Rerank candidates with BM25",
            lambda lay: [Input(lay.index, "index"), Input(lay.candidates, "index"), Input(lay.sessions("test"), "sessions")],
            lambda lay: lay.run,
            run_rerank,
        ),
        Stage(
            "eval",
            "Compute MAP, MRR and P@1",
            lambda lay: [Input(lay.run, "rerank"), Input(lay.qrels, "index")],
            lambda lay: lay.measures,
            run_eval,
        ),
        Stage(
            "significance",
            "Paired t-tests between all reranked runs and the results table",
            _significance_inputs,
            lambda lay: lay.significance,
            run_significance,
        ),
        Stage(
            "export",
            "Export doc_id, title and URL as TSV",
            lambda lay: [Input(lay.doc_data, "extract")],
            lambda lay: lay.export,
            run_export,
        ),
    )
}


def execute(stage: Stage, ctx: StageContext) -> bool:
    """Run ``stage`` unless its stamp is current.

    Returns:
        True when the stage ran, False for a no-op or a dry run

    Raises:
        MissingArtifactError: If an upstream artifact is absent
    """
    layout = ctx.layout
    inputs = stage.inputs(layout)
    for item in inputs:
        if not item.path.exists():
            raise MissingArtifactError(item.path, item.producer)
    if stage.name == "diff":
        other = _other_store(ctx.args)
        inputs = [*inputs, Input(other / DATA_FILE, "extract")]
        if not (other / DATA_FILE).exists():
            raise MissingArtifactError(other / DATA_FILE, "extract")
    if stage.name == "significance":
        inputs = [*inputs, *(Input(path, "rerank") for _, path in _external_runs(ctx) if path.is_file())]

    output = stage.output(layout)
    stamp = build_stamp(stage.name, ctx.settings, ((item.path, item.pattern) for item in inputs))
    current = is_current(output, stamp) and not ctx.option("force")

    if ctx.option("dry_run"):
        print(f"{stage.name}: {stage.help}")
        for item in inputs:
            print(f"  input  {item.path}")
        print(f"  output {output}")
        print(f"  status {'up to date' if current else 'would run'}")
        return False
    if current:
        logger.info("Stage up to date", stage=stage.name, output=str(output))
        print(f"{stage.name}: up to date")
        return False

    logger.info("Stage started", stage=stage.name, config_hash=stamp.config_hash[:12])
    with stage_context(stage.name, config_hash=stamp.config_hash[:12]):
        complete = stage.body(ctx)
    if complete is False:
        logger.info("Stage incomplete, not stamping", stage=stage.name)
        return True
    write_stamp(output, stamp)
    logger.info("Stage finished", stage=stage.name, output=str(output))
    return True
