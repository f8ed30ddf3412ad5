"""SHA-256 digests of pipeline inputs and artifacts."""

import hashlib
import re
from collections.abc import Iterable
from pathlib import Path

from core.logging import get_logger

logger = get_logger(__name__)

_SHA256_HEX = re.compile(r"[0-9a-fA-F]{64}")
PARTIAL_SUFFIX = ".tmp"


def calculate_file_hash(file_path: Path) -> str:
    """SHA-256 of a file's bytes as 64 hex characters.

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the path is a directory or other non-file
    """
    if not file_path.exists():
        raise FileNotFoundError(f"File not found: {file_path}")
    if not file_path.is_file():
        raise ValueError(f"Path is not a file: {file_path}")

    try:
        with open(file_path, "rb") as f:
            digest = hashlib.file_digest(f, "sha256").hexdigest()
    except OSError as e:
        logger.error("Failed to read file for hashing", path=str(file_path), error=str(e))
        raise
    logger.debug("Hash calculated", path=str(file_path), hash=digest[:8])
    return digest


def calculate_tree_hash(paths: Iterable[Path], root: Path | None = None) -> str:
    """Digest over (relative name, content digest) of every file.

    Directories are expanded recursively and partial ``.tmp`` writes skipped.
    The result does not depend on the order ``paths`` are given in, and names
    are taken relative to ``root`` so a moved tree keeps its digest.
    """
    files: set[Path] = set()
    for path in paths:
        if path.is_dir():
            files.update(p for p in path.rglob("*") if p.is_file() and not p.name.endswith(PARTIAL_SUFFIX))
        elif path.exists():
            files.add(path)

    tree = hashlib.sha256()
    for path in sorted(files):
        name = path.relative_to(root).as_posix() if root and path.is_relative_to(root) else path.name
        tree.update(f"{name}\t{calculate_file_hash(path)}\n".encode())
    return tree.hexdigest()


def validate_hash_format(hash_value: str) -> bool:
    """True for a 64-character hexadecimal SHA-256 digest."""
    return _SHA256_HEX.fullmatch(hash_value) is not None
