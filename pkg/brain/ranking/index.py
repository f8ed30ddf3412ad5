"""In-memory inverted index with a versioned binary file format.

File layout (all integers little-endian unsigned 64-bit unless noted)::

    magic      8 bytes  b"AOLIAIDX"
    version    uint32
    N          document count
    N x        (id length, id UTF-8 bytes, document length)
    T          term count
    T x        (term length, term UTF-8 bytes, posting count,
                posting count x (document ordinal, term frequency))
"""

from __future__ import annotations

import io
import struct
from collections import Counter
from collections.abc import Iterable
from dataclasses import dataclass, field
from pathlib import Path

from core.errors import DataError, IndexFormatError
from core.logging import get_logger

logger = get_logger(__name__)

MAGIC = b"AOLIAIDX"
FORMAT_VERSION = 1
_U64 = struct.Struct("<Q")
_U32 = struct.Struct("<I")


def _bytewise(value: str) -> bytes:
    return value.encode("utf-8")


@dataclass(slots=True)
class InvertedIndex:
    """Postings sorted by doc_id plus per-document token counts."""

    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    _tf: dict[str, dict[str, int]] = field(default_factory=dict, compare=False, repr=False)

    @property
    def doc_count(self) -> int:
        return len(self.doc_lengths)

    @property
    def avg_doc_length(self) -> float:
        if not self.doc_lengths:
            return 0.0
        return sum(self.doc_lengths.values()) / len(self.doc_lengths)

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def tf(self, term: str, doc_id: str) -> int:
        lookup = self._tf.get(term)
        if lookup is None:
            lookup = dict(self.postings.get(term, ()))
            self._tf[term] = lookup
        return lookup.get(doc_id, 0)

    def __contains__(self, doc_id: object) -> bool:
        return doc_id in self.doc_lengths

    @classmethod
    def merge(cls, shards: Iterable[InvertedIndex]) -> InvertedIndex:
        """Combine indexes over disjoint document sets.

        Raises:
            DataError: If two shards hold the same doc_id
        """
        lengths: dict[str, int] = {}
        postings: dict[str, list[tuple[str, int]]] = {}
        for shard in shards:
            overlap = lengths.keys() & shard.doc_lengths.keys()
            if overlap:
                raise DataError(f"Index shards overlap on doc_id {min(overlap)}")
            lengths.update(shard.doc_lengths)
            for term, plist in shard.postings.items():
                postings.setdefault(term, []).extend(plist)
        return cls._normalized(postings, lengths)

    @classmethod
    def _normalized(cls, postings: dict[str, list[tuple[str, int]]], lengths: dict[str, int]) -> InvertedIndex:
        return cls(
            postings={
                term: sorted(postings[term], key=lambda p: _bytewise(p[0]))
                for term in sorted(postings, key=_bytewise)
            },
            doc_lengths={doc_id: lengths[doc_id] for doc_id in sorted(lengths, key=_bytewise)},
        )


def build_index(docs: Iterable[tuple[str, list[str]]]) -> InvertedIndex:
    """Index (doc_id, tokens) pairs.

    Raises:
        DataError: If a doc_id repeats
    """
    lengths: dict[str, int] = {}
    postings: dict[str, list[tuple[str, int]]] = {}
    for doc_id, tokens in docs:
        if doc_id in lengths:
            raise DataError(f"Duplicate doc_id {doc_id} in index input")
        lengths[doc_id] = len(tokens)
        for term, count in Counter(tokens).items():
            postings.setdefault(term, []).append((doc_id, count))
    index = InvertedIndex._normalized(postings, lengths)
    logger.info("Index built", documents=index.doc_count, terms=len(index.postings))
    return index


def _write_str(out: io.BytesIO, value: str) -> None:
    data = value.encode("utf-8")
    out.write(_U64.pack(len(data)))
    out.write(data)


def save_index(index: InvertedIndex, path: Path) -> None:
    """Persist an index; equal indexes produce byte-identical files."""
    out = io.BytesIO()
    out.write(MAGIC)
    out.write(_U32.pack(FORMAT_VERSION))
    ordinals: dict[str, int] = {}
    out.write(_U64.pack(len(index.doc_lengths)))
    for ordinal, doc_id in enumerate(sorted(index.doc_lengths, key=_bytewise)):
        ordinals[doc_id] = ordinal
        _write_str(out, doc_id)
        out.write(_U64.pack(index.doc_lengths[doc_id]))
    out.write(_U64.pack(len(index.postings)))
    for term in sorted(index.postings, key=_bytewise):
        _write_str(out, term)
        plist = index.postings[term]
        out.write(_U64.pack(len(plist)))
        for doc_id, tf in plist:
            out.write(_U64.pack(ordinals[doc_id]))
            out.write(_U64.pack(tf))

    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(out.getvalue())
    tmp.replace(path)
    logger.info("Index saved", path=str(path), bytes=out.tell())


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise IndexFormatError(f"{self.path}: truncated at byte {self.pos}")
        chunk = self.data[self.pos : self.pos + size]
        self.pos += size
        return chunk

    def u64(self) -> int:
        return _U64.unpack(self.take(_U64.size))[0]

    def text(self) -> str:
        try:
            return self.take(self.u64()).decode("utf-8")
        except UnicodeDecodeError as e:
            raise IndexFormatError(f"{self.path}: invalid UTF-8 at byte {self.pos}") from e


def load_index(path: Path) -> InvertedIndex:
    """Read an index file.

    Raises:
        IndexFormatError: On a wrong magic, unknown version or truncated body
    """
    reader = _Reader(path.read_bytes(), path)
    if reader.take(len(MAGIC)) != MAGIC:
        raise IndexFormatError(f"{path}: not an index file")
    version = _U32.unpack(reader.take(_U32.size))[0]
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"{path}: unsupported index version {version}")

    doc_ids: list[str] = []
    lengths: dict[str, int] = {}
    for _ in range(reader.u64()):
        doc_id = reader.text()
        doc_ids.append(doc_id)
        lengths[doc_id] = reader.u64()

    postings: dict[str, list[tuple[str, int]]] = {}
    for _ in range(reader.u64()):
        term = reader.text()
        plist: list[tuple[str, int]] = []
        for _ in range(reader.u64()):
            ordinal = reader.u64()
            if ordinal >= len(doc_ids):
                raise IndexFormatError(f"{path}: posting references unknown document {ordinal}")
            plist.append((doc_ids[ordinal], reader.u64()))
        postings[term] = plist
    if reader.pos != len(reader.data):
        raise IndexFormatError(f"{path}: {len(reader.data) - reader.pos} trailing bytes")
    return InvertedIndex(postings=postings, doc_lengths=lengths)
