"""Block-compressed document store with a doc_id index sidecar.

Records are JSON lines sorted by doc_id. Every ``block_size`` records form one
gzip member; ``documents.idx`` maps each doc_id to the byte offset of the
member holding it. Members carry no filename and a zero mtime, so two builds
from the same documents are byte-identical.
"""

from __future__ import annotations

import gzip
import json
import zlib
from collections.abc import Iterable, Iterator
from pathlib import Path

from brain.schemas import DocumentRecord
from core.errors import DataError, DocumentNotFoundError, DuplicateDocIdError, MissingArtifactError
from core.logging import get_logger

logger = get_logger(__name__)

DATA_FILE = "documents.gz"
INDEX_FILE = "documents.idx"
DEFAULT_BLOCK_SIZE = 256


def _encode_block(records: list[DocumentRecord]) -> bytes:
    lines = "".join(
        json.dumps(record.model_dump(mode="json"), ensure_ascii=False, sort_keys=True) + "\n"
        for record in records
    )
    return gzip.compress(lines.encode("utf-8"), compresslevel=6, mtime=0)


def _decode_member(handle, offset: int) -> list[DocumentRecord]:
    """Decode the single gzip member starting at ``offset``."""
    handle.seek(offset)
    decompressor = zlib.decompressobj(wbits=16 + zlib.MAX_WBITS)
    chunks: list[bytes] = []
    while not decompressor.eof:
        data = handle.read(1 << 16)
        if not data:
            raise DataError(f"Truncated document store block at offset {offset}")
        chunks.append(decompressor.decompress(data))
    text = b"".join(chunks).decode("utf-8")
    return [DocumentRecord.model_validate_json(line) for line in text.splitlines() if line]


def store_documents(docs: Iterable[DocumentRecord], store_dir: Path, block_size: int = DEFAULT_BLOCK_SIZE) -> int:
    """Write documents sorted by doc_id into a block store.

    Returns:
        Number of documents written

    Raises:
        DuplicateDocIdError: If two documents share a doc_id
    """
    by_id: dict[str, DocumentRecord] = {}
    for doc in docs:
        if doc.doc_id in by_id:
            raise DuplicateDocIdError(doc.doc_id, [by_id[doc.doc_id].url, doc.url])
        by_id[doc.doc_id] = doc
    ordered = [by_id[doc_id] for doc_id in sorted(by_id, key=lambda d: d.encode("utf-8"))]

    store_dir.mkdir(parents=True, exist_ok=True)
    data_tmp = store_dir / (DATA_FILE + ".tmp")
    index_tmp = store_dir / (INDEX_FILE + ".tmp")
    offset = 0
    with open(data_tmp, "wb") as data, open(index_tmp, "w", encoding="utf-8", newline="\n") as index:
        for start in range(0, len(ordered), block_size):
            block = ordered[start : start + block_size]
            for record in block:
                index.write(f"{record.doc_id}\t{offset}\n")
            member = _encode_block(block)
            data.write(member)
            offset += len(member)
    data_tmp.replace(store_dir / DATA_FILE)
    index_tmp.replace(store_dir / INDEX_FILE)

    logger.info("Document store written", path=str(store_dir), documents=len(ordered), bytes=offset)
    return len(ordered)


class DocumentStore:
    """Random access by doc_id and ordered scans over a block store."""

    def __init__(self, store_dir: Path):
        self.store_dir = store_dir
        self.data_path = store_dir / DATA_FILE
        index_path = store_dir / INDEX_FILE
        if not self.data_path.exists() or not index_path.exists():
            raise MissingArtifactError(self.data_path, "extract")
        self._offsets: dict[str, int] = {}
        with open(index_path, encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                doc_id, sep, offset = line.rstrip("\n").partition("\t")
                if not sep or not offset.isdigit():
                    raise DataError(f"{index_path}:{line_number}: malformed index row")
                self._offsets[doc_id] = int(offset)
        self._cache_offset: int | None = None
        self._cache: dict[str, DocumentRecord] = {}

    def __len__(self) -> int:
        return len(self._offsets)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self._offsets

    def doc_ids(self) -> list[str]:
        return list(self._offsets)

    def get(self, doc_id: str) -> DocumentRecord:
        """Fetch one document.

        Raises:
            DocumentNotFoundError: If the doc_id is not in the store
        """
        offset = self._offsets.get(doc_id)
        if offset is None:
            raise DocumentNotFoundError(doc_id)
        if offset != self._cache_offset:
            with open(self.data_path, "rb") as f:
                self._cache = {record.doc_id: record for record in _decode_member(f, offset)}
            self._cache_offset = offset
        return self._cache[doc_id]

    def get_many(self, doc_ids: Iterable[str]) -> dict[str, DocumentRecord]:
        """Documents for the given ids that exist in the store."""
        found: dict[str, DocumentRecord] = {}
        for doc_id in sorted(set(doc_ids), key=lambda d: self._offsets.get(d, -1)):
            if doc_id in self._offsets:
                found[doc_id] = self.get(doc_id)
        return found

    def scan(self) -> Iterator[DocumentRecord]:
        """All documents in doc_id order."""
        with gzip.open(self.data_path, "rt", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    yield DocumentRecord.model_validate_json(line)


def load_documents(store_dir: Path, doc_ids: Iterable[str] | None = None) -> list[DocumentRecord]:
    """Load the whole store, or just the listed documents, in doc_id order.

    Raises:
        DocumentNotFoundError: If a listed doc_id is absent
    """
    store = DocumentStore(store_dir)
    if doc_ids is None:
        return list(store.scan())
    return [store.get(doc_id) for doc_id in sorted(set(doc_ids), key=lambda d: d.encode("utf-8"))]


def export_tsv(store: DocumentStore, path: Path) -> int:
    """Write ``doc_id \\t title \\t url`` rows in doc_id order."""
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="\n") as f:
        for doc in store.scan():
            title = doc.title.replace("\t", " ")
            f.write(f"{doc.doc_id}\t{title}\t{doc.url}\n")
            count += 1
    tmp.replace(path)
    logger.info("Documents exported", path=str(path), documents=count)
    return count
