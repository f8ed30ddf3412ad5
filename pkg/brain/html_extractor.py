"""Title and body text extraction from archived HTML."""

from __future__ import annotations

import codecs
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass

import numpy as np
from bs4 import BeautifulSoup, Comment
from bs4.element import PreformattedString
from bs4.dammit import EncodingDetector

from brain.schemas import CorpusStatistics, DocumentRecord, ExtractionReport, LengthSummary
from brain.tokenizer import tokenize
from core.errors import ExtractionError
from core.logging import get_logger
from core.observability import record_metric, record_stage_failure
from ingestion.mapping_file import ArchiveMapping
from ingestion.raw_store import RawStore

logger = get_logger(__name__)

# Elements whose content never counts as page text
NON_CONTENT_TAGS = ("script", "style", "head", "noscript", "template", "title", "iframe", "object")

BLOCK_TAGS = frozenset(
    {
        "address", "article", "aside", "blockquote", "br", "dd", "div", "dl", "dt", "fieldset",
        "figcaption", "figure", "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header",
        "hr", "li", "main", "nav", "ol", "p", "pre", "section", "table", "td", "th", "tr", "ul",
    }
)

_WHITESPACE = re.compile(r"\s+")
_CHARSET_PARAM = re.compile(r"charset\s*=\s*[\"']?([\w.:-]+)", re.IGNORECASE)

FALLBACK_ENCODING = "latin-1"


@dataclass(frozen=True, slots=True)
class ExtractedText:
    title: str
    body: str


def _collapse(text: str) -> str:
    # markup delimiters that survive as literal text are neutralised
    text = text.replace("<", " ").replace(">", " ")
    return _WHITESPACE.sub(" ", text).strip()


def charset_from_content_type(content_type: str | None) -> str | None:
    """Charset parameter of an HTTP Content-Type header, if any."""
    if not content_type:
        return None
    match = _CHARSET_PARAM.search(content_type)
    return match.group(1) if match else None


def _known_codec(name: str | None) -> str | None:
    if not name:
        return None
    try:
        return codecs.lookup(name).name
    except LookupError:
        return None


def resolve_charset(payload: bytes, charset_hint: str | None = None) -> tuple[str, str]:
    """Decode a payload following HTTP, meta tag, BOM, UTF-8, then 8-bit fallback.

    Returns:
        (decoded text, codec name used)
    """
    stripped, bom_encoding = EncodingDetector.strip_byte_order_mark(payload)
    candidates = [
        _known_codec(charset_hint),
        _known_codec(EncodingDetector.find_declared_encoding(payload, is_html=True)),
        _known_codec(bom_encoding),
        "utf-8",
    ]
    for codec in candidates:
        if codec is None:
            continue
        data = stripped if bom_encoding and codec == _known_codec(bom_encoding) else payload
        try:
            return data.decode(codec), codec
        except (UnicodeDecodeError, LookupError):
            logger.debug("Charset candidate failed", codec=codec)
    return payload.decode(FALLBACK_ENCODING), FALLBACK_ENCODING


def _visible_text(soup: BeautifulSoup) -> str:
    parts: list[str] = []
    for element in soup.descendants:
        if isinstance(element, PreformattedString):
            continue
        if isinstance(element, str):
            parts.append(str(element))
        elif element.name in BLOCK_TAGS:
            parts.append(" ")
    return "".join(parts)


def extract_text(payload: bytes | str, charset_hint: str | None = None) -> ExtractedText:
    """Extract the title and visible body text of an HTML page.

    Unclosed and misnested tags are repaired by the lxml parser; block
    boundaries become single spaces.

    Raises:
        ExtractionError: If the payload cannot be parsed at all
    """
    text = payload if isinstance(payload, str) else resolve_charset(payload, charset_hint)[0]
    try:
        soup = BeautifulSoup(text, "lxml")
    except Exception as e:  # noqa: BLE001 - parser failures surface as many types
        raise ExtractionError(f"HTML parse failed: {e}") from e

    title_tag = soup.find("title")
    title = _collapse(title_tag.get_text(" ")) if title_tag is not None else ""

    for tag in soup(list(NON_CONTENT_TAGS)):
        tag.decompose()
    for comment in soup.find_all(string=lambda s: isinstance(s, Comment)):
        comment.extract()

    body = _collapse(_visible_text(soup))
    return ExtractedText(title=title, body=body)


def truncate_tokens(body: str, max_tokens: int) -> tuple[str, bool]:
    """Cut a body after ``max_tokens`` tokens, keeping the original spacing."""
    count = 0
    for match in re.finditer(r"[A-Za-z0-9]+", body):
        count += 1
        if count > max_tokens:
            return body[: match.start()].rstrip(), True
    return body, False


def extract_documents(
    raw_store: RawStore,
    mapping: Iterable[ArchiveMapping],
    max_doc_tokens: int,
    report: ExtractionReport | None = None,
) -> Iterator[DocumentRecord]:
    """Extract every mapped document from its raw payload, in doc_id order.

    Parse failures and missing payloads exclude the document; over-long
    bodies are truncated with a warning.
    """
    report = report if report is not None else ExtractionReport()
    for row in sorted(mapping):
        report.attempted += 1
        try:
            if not raw_store.has(row.doc_id):
                raise ExtractionError(f"raw payload missing for {row.doc_id}")
            meta = raw_store.get_meta(row.doc_id)
            hint = meta.charset or charset_from_content_type(meta.content_type)
            extracted = extract_text(raw_store.get_payload(row.doc_id), hint)
        except (ExtractionError, OSError, ValueError) as e:
            report.excluded += 1
            report.excluded_doc_ids.append(row.doc_id)
            record_stage_failure("extract", row.doc_id, str(e))
            continue

        body, truncated = truncate_tokens(extracted.body, max_doc_tokens)
        if truncated:
            report.truncated += 1
            logger.warning("Body truncated", doc_id=row.doc_id, max_tokens=max_doc_tokens)
        report.extracted += 1
        yield DocumentRecord(
            doc_id=row.doc_id,
            url=row.original_url,
            title=extracted.title,
            body=body,
            timestamp=row.timestamp,
        )

    record_metric("documents_extracted", report.extracted)
    record_metric("documents_excluded", report.excluded)


def _length_summary(lengths: list[int]) -> LengthSummary:
    if not lengths:
        return LengthSummary(median=0.0, q1=0.0, q3=0.0, maximum=0)
    q1, median, q3 = np.percentile(np.asarray(lengths, dtype=float), [25, 50, 75])
    return LengthSummary(median=float(median), q1=float(q1), q3=float(q3), maximum=max(lengths))


def corpus_statistics(docs: Iterable[DocumentRecord]) -> CorpusStatistics:
    """Median and interquartile token lengths of titles and bodies."""
    titles: list[int] = []
    bodies: list[int] = []
    for doc in docs:
        titles.append(len(tokenize(doc.title)))
        bodies.append(len(tokenize(doc.body)))
    return CorpusStatistics(
        documents=len(titles),
        title_tokens=_length_summary(titles),
        body_tokens=_length_summary(bodies),
        empty_titles=sum(1 for n in titles if n == 0),
    )
