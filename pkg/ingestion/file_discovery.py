"""Query-log file discovery in a log directory."""

from pathlib import Path

from core.logging import get_logger

logger = get_logger(__name__)

# Supported log file types
SUPPORTED_EXTENSIONS = {".txt", ".tsv", ".gz"}


def discover_log_files(log_dir: Path) -> list[Path]:
    """Discover query-log files in the log directory.

    Args:
        log_dir: Path to log directory

    Returns:
        Log file paths sorted bytewise by their relative path
    """
    if not log_dir.exists():
        logger.warning("Log directory does not exist", path=str(log_dir))
        return []

    if not log_dir.is_dir():
        logger.error("Log path is not a directory", path=str(log_dir))
        return []

    found = [
        path
        for path in log_dir.rglob("*")
        if path.is_file() and is_supported_file(path) and not path.name.endswith(".stamp.json")
    ]
    found.sort(key=lambda p: p.relative_to(log_dir).as_posix().encode("utf-8"))
    logger.info("Discovered log files", directory=str(log_dir), count=len(found))
    return found


def is_supported_file(file_path: Path) -> bool:
    """Check if file looks like a query log.

    Args:
        file_path: Path to file

    Returns:
        True if file is supported
    """
    return file_path.suffix.lower() in SUPPORTED_EXTENSIONS
