"""Provenance sidecars: ``<artifact>.stamp.json`` next to each stage output."""

from __future__ import annotations

import json
from collections.abc import Iterable
from pathlib import Path

from pydantic import BaseModel, Field, field_validator

from core.config import TOOL_NAME, TOOL_VERSION, Settings
from core.logging import get_logger
from ingestion.file_hasher import calculate_file_hash, calculate_tree_hash, validate_hash_format

logger = get_logger(__name__)

STAMP_SUFFIX = ".stamp.json"


class Stamp(BaseModel):
    """Tool version, configuration hash and input digests of one artifact."""

    tool: str = TOOL_NAME
    tool_version: str = TOOL_VERSION
    stage: str
    config_hash: str
    inputs: dict[str, str] = Field(default_factory=dict)

    @field_validator("config_hash")
    @classmethod
    def validate_config_hash(cls, v: str) -> str:
        if not validate_hash_format(v):
            raise ValueError("config_hash must be a SHA-256 hex digest")
        return v


def stamp_path(artifact: Path) -> Path:
    return artifact.with_name(artifact.name + STAMP_SUFFIX)


def input_key(path: Path) -> str:
    """Last two path components, so stamps do not depend on where the work tree lives."""
    return "/".join(path.parts[-2:])


def input_digest(path: Path, pattern: str = "*") -> str:
    """SHA-256 of a file, or an order-independent digest over matching files of a tree."""
    if path.is_dir():
        return calculate_tree_hash(sorted(p for p in path.rglob(pattern) if p.is_file()), root=path)
    return calculate_file_hash(path)


def input_digests(inputs: Iterable[tuple[Path, str]]) -> dict[str, str]:
    """Digests keyed by :func:`input_key` for (path, glob pattern) pairs."""
    return {input_key(path): input_digest(path, pattern) for path, pattern in sorted(set(inputs))}


def build_stamp(stage: str, settings: Settings, inputs: Iterable[tuple[Path, str]]) -> Stamp:
    return Stamp(stage=stage, config_hash=settings.config_hash(), inputs=input_digests(inputs))


def read_stamp(artifact: Path) -> Stamp | None:
    path = stamp_path(artifact)
    if not path.is_file():
        return None
    try:
        return Stamp.model_validate_json(path.read_text(encoding="utf-8"))
    except ValueError:
        logger.warning("Ignoring unreadable stamp", path=str(path))
        return None


def write_stamp(artifact: Path, stamp: Stamp) -> None:
    path = stamp_path(artifact)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(stamp.model_dump(), indent=2, sort_keys=True) + "\n", encoding="utf-8")


def is_current(artifact: Path, stamp: Stamp) -> bool:
    """True when ``artifact`` exists and its sidecar matches ``stamp`` exactly."""
    if not artifact.exists():
        return False
    return read_stamp(artifact) == stamp
