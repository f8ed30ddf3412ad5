"""On-disk store of raw archived payloads and their fetch metadata."""

from __future__ import annotations

import gzip
from collections.abc import Iterator
from pathlib import Path

from pydantic import BaseModel

from core.logging import get_logger

logger = get_logger(__name__)


class RawPayloadMeta(BaseModel):
    """Fetch metadata written next to each raw payload."""

    doc_id: str
    original_url: str
    archive_url: str
    timestamp: str
    http_status: int
    content_type: str | None = None
    charset: str | None = None
    byte_length: int
    attempts: int
    fetched_at: str


class RawStore:
    """Raw payloads under ``<root>/<id[:2]>/<id>.gz`` with ``<id>.json`` metadata."""

    def __init__(self, root: Path):
        self.root = root

    def _base(self, doc_id: str) -> Path:
        return self.root / doc_id[:2] / doc_id

    def payload_path(self, doc_id: str) -> Path:
        return self._base(doc_id).with_suffix(".gz")

    def meta_path(self, doc_id: str) -> Path:
        return self._base(doc_id).with_suffix(".json")

    def put(self, meta: RawPayloadMeta, payload: bytes) -> None:
        """Write payload first, then metadata; metadata presence marks completion."""
        payload_path = self.payload_path(meta.doc_id)
        payload_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = payload_path.with_name(payload_path.name + ".tmp")
        tmp.write_bytes(gzip.compress(payload, compresslevel=6, mtime=0))
        tmp.replace(payload_path)

        meta_path = self.meta_path(meta.doc_id)
        tmp = meta_path.with_name(meta_path.name + ".tmp")
        tmp.write_text(meta.model_dump_json(indent=None), encoding="utf-8")
        tmp.replace(meta_path)

    def get_meta(self, doc_id: str) -> RawPayloadMeta:
        return RawPayloadMeta.model_validate_json(self.meta_path(doc_id).read_text(encoding="utf-8"))

    def get_payload(self, doc_id: str) -> bytes:
        return gzip.decompress(self.payload_path(doc_id).read_bytes())

    def has(self, doc_id: str) -> bool:
        return self.meta_path(doc_id).exists() and self.payload_path(doc_id).exists()

    def doc_ids(self) -> Iterator[str]:
        """Stored doc_ids in sorted order."""
        if not self.root.exists():
            return
        for meta_path in sorted(self.root.glob("*/*.json")):
            yield meta_path.stem
