"""
Logging
"""

# pyright: basic

import logging
import sys
from contextvars import ContextVar

from loguru import logger
from ulid import ULID

from app.core.config import settings
from app.schema.log_entry import LogEntry

__all__ = (
    "command",
    "configure",
    "log_serializer",
    "logger",
    "new_run_id",
    "run_id",
    "sink",
)

# One id per CLI invocation or MCP tool call, stamped on every record with its command.
run_id: ContextVar[str] = ContextVar("run_id", default="")
command: ContextVar[str] = ContextVar("command", default="")


def new_run_id(name: str = "") -> str:
    value = str(ULID())
    run_id.set(value)
    command.set(name)
    return value


class InterceptHandler(logging.Handler):
    def emit(self, record):
        # Get corresponding Loguru level
        try:
            level = logger.level(record.levelname).name
        except ValueError:
            level = record.levelno

        # Find caller to get correct stack depth
        frame, depth = logging.currentframe(), 2
        while frame.f_back and frame.f_code.co_filename == logging.__file__:
            frame = frame.f_back
            depth += 1

        logger.opt(depth=depth, exception=record.exc_info).log(level, record.getMessage())


def log_serializer(record) -> str:
    """
    Custom log serializer for loguru
    """

    message = record["message"]
    if len(message) > settings.LOG_MESSAGE_MAX_LEN:
        message = message[: settings.LOG_MESSAGE_MAX_LEN - 3] + "..."

    log_entry = LogEntry(
        asctime=record["time"],
        levelname=record["level"].name,
        run_id=run_id.get(),
        command=command.get(),
        logger=record["name"] or "",
        message=message,
    )

    return log_entry.model_dump_json()


def sink(message) -> None:
    """
    Custom sink for loguru; stdout is reserved for command output and the stdio transport
    """
    print(log_serializer(message.record), file=sys.stderr)


def configure(debug: bool | None = None) -> None:
    """Reinstall the sink, e.g. after ``--debug`` flips the level."""
    logger.remove()
    logger.add(sink, level="DEBUG" if (settings.DEBUG if debug is None else debug) else "INFO")


configure()

logging.basicConfig(handlers=[InterceptHandler()], level=logging.INFO)
