"""Command-line entry point: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 archive requests exhausted.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import httpx
from pydantic import ValidationError

from core.config import TOOL_VERSION, Settings, load_settings
from core.errors import PipelineError, UsageError
from core.logging import configure_logging, format_error_message, get_logger
from interface.cli.stages import STAGES, StageContext, execute

logger = get_logger(__name__)


class _ArgumentParser(argparse.ArgumentParser):
    """Report bad flags as usage errors instead of exiting with argparse's status 2."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value configuration file")
    common.add_argument("--jobs", type=int, help="Cap on internal parallelism")
    common.add_argument("--seed", type=int, help="Random seed for sampling and retry jitter")
    common.add_argument("--include-url", action="store_true", default=None, help="Append URL tokens to document text")
    common.add_argument("--titles-from", type=Path, help="Document store of another corpus version to take titles from")
    common.add_argument("--session-dir", type=Path, help="Session dataset directory (e.g. built from another version)")
    common.add_argument("--dry-run", action="store_true", help="Print the plan without running it")
    common.add_argument("--force", action="store_true", help="Run even if the output stamp is current")
    common.add_argument("--mock-endpoint", help="Availability endpoint of a mock archive")

    parser = _ArgumentParser(prog="aolia", description="Reconstruct an archived query-log corpus and evaluate rankers")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    commands = parser.add_subparsers(dest="command", required=True, metavar="command")
    subparsers = {
        name: commands.add_parser(name, parents=[common], help=stage.help, description=stage.help)
        for name, stage in STAGES.items()
    }
    subparsers["map"].add_argument("--limit", type=int, help="Stop after this many URLs (resume later)")
    subparsers["fetch"].add_argument(
        "--revalidate", action="store_true", help="Re-query availability and drop documents no longer archived"
    )
    subparsers["diff"].add_argument("--other-store", type=Path, help="Document store of the other corpus version")
    subparsers["diff"].add_argument("--name-a", help="Label of this corpus")
    subparsers["diff"].add_argument("--name-b", help="Label of the other corpus")
    subparsers["diff"].add_argument("--sample", type=int, default=100, help="Divergent-title pairs to sample")
    subparsers["significance"].add_argument(
        "--run", action="append", metavar="NAME=PATH", help="Additional run file to compare (repeatable)"
    )
    return parser


def settings_from_args(args: argparse.Namespace) -> Settings:
    """Configuration file, then environment, then flags (flags win)."""
    try:
        return load_settings(
            args.config,
            JOBS=args.jobs,
            SEED=args.seed,
            INCLUDE_URL=args.include_url,
            TITLES_FROM=args.titles_from,
            SESSION_DIR=args.session_dir,
            ARCHIVE_ENDPOINT=args.mock_endpoint,
        )
    except ValidationError as e:
        raise UsageError(f"Invalid configuration: {e}") from e
    except FileNotFoundError as e:
        raise UsageError(str(e)) from e


def main(argv: list[str] | None = None, transport: httpx.AsyncBaseTransport | None = None) -> int:
    """Run one pipeline stage.

    Args:
        argv: Command-line arguments (defaults to ``sys.argv[1:]``)
        transport: HTTP transport for archive requests (tests route it to the mock archive)

    Returns:
        Process exit code
    """
    command = None
    try:
        args = build_parser().parse_args(argv)
        command = args.command
        settings = settings_from_args(args)
        configure_logging(log_level=settings.LOG_LEVEL, log_format=settings.LOG_FORMAT)
        execute(STAGES[command], StageContext(settings, args, transport))
    except PipelineError as e:
        logger.error("Stage failed", stage=command, error=str(e), exit_code=e.exit_code)
        print(format_error_message(e, {"stage": command} if command else None), file=sys.stderr)
        return e.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
