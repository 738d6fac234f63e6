import argparse
import logging
import sys
from typing import List, Optional

from app.commands import (
    data_command,
    eval_command,
    reweight_command,
    runs_command,
    stats_command,
    train_command,
)
from app.config import Settings, get_settings
from app.exceptions import AppError

logger = logging.getLogger(__name__)

COMMANDS = (
    train_command,
    reweight_command,
    stats_command,
    eval_command,
    data_command,
    runs_command,
)


def configure_logging(settings: Settings) -> None:
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if settings.LOG_FILE:
        handlers.append(logging.FileHandler(settings.LOG_FILE))
    logging.basicConfig(
        level=settings.LOG_LEVEL.upper(),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vcs",
        description="Weighted network embedding with vertex-context sampling.",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    settings = get_settings()
    configure_logging(settings)
    args = build_parser().parse_args(argv)

    try:
        args.handler(args)
    except AppError as e:
        if settings.DEBUG:
            logger.error(f"{args.command} failed", exc_info=True)
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        where = f" ({e.filename})" if e.filename else ""
        print(f"error: {e.strerror or e}{where}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"Unhandled exception in {args.command}: {e}", exc_info=settings.DEBUG)
        print(f"error: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
