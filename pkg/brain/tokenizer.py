"""Case-folded alphanumeric tokenization of titles, bodies and URLs."""

from __future__ import annotations

import re

from brain.schemas import DocumentRecord

# Non-ASCII letters act as separators
_TOKEN = re.compile(r"[A-Za-z0-9]+")


def tokenize(text: str) -> list[str]:
    """Split on every character outside ASCII letters and digits, then case fold."""
    if not text:
        return []
    return [token.lower() for token in _TOKEN.findall(text)]


def tokenize_url(url: str) -> list[str]:
    """Tokenize the full URL string: scheme, host, path and query."""
    return tokenize(url)


def document_text(doc: DocumentRecord, include_url: bool = False, include_body: bool = False) -> list[str]:
    """Token sequence a ranker sees for a document.

    Args:
        doc: Extracted document
        include_url: Append the tokenized URL after the title tokens
        include_body: Append body tokens after the title (and URL) tokens
    """
    tokens = tokenize(doc.title)
    if include_url:
        tokens.extend(tokenize_url(doc.url))
    if include_body:
        tokens.extend(tokenize(doc.body))
    return tokens
