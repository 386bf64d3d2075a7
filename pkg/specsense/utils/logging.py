"""Structured logging for specsense.

Logs are JSON lines on stderr; stdout is reserved for command output.
"""

import logging
import sys
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterator, Optional, TextIO

from pythonjsonlogger.json import JsonFormatter

ROOT_LOGGER = "specsense"


class RunContextFilter(logging.Filter):
    """Stamps every record with fields describing the current run."""

    def __init__(self, **fields: Any):
        super().__init__()
        self.fields: Dict[str, Any] = dict(fields)

    def filter(self, record: logging.LogRecord) -> bool:
        for key, value in self.fields.items():
            if not hasattr(record, key):
                setattr(record, key, value)
        return True


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def setup_logging(
    log_level: str = "INFO",
    log_file: Optional[str] = None,
    json_format: bool = True,
    stream: Optional[TextIO] = None
) -> logging.Logger:
    """Configure the ``specsense`` logger.

    Calling it again replaces the previous handlers, so the CLI can first log
    with defaults and reconfigure once settings are resolved.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional file receiving the same records
        json_format: Whether to use JSON format for logs
        stream: Console stream; stderr when omitted

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(getattr(logging, log_level.upper(), logging.INFO))

    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    if json_format:
        formatter: logging.Formatter = JsonFormatter(
            "%(timestamp)s %(levelname)s %(name)s %(message)s",
            timestamp=_utc_now
        )
    else:
        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S"
        )

    console_handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_path, encoding="utf-8")
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def bind_run_context(logger: logging.Logger, **fields: Any) -> RunContextFilter:
    """Attach ``fields`` to every record emitted through ``logger``'s handlers."""
    context = RunContextFilter(**fields)
    for handler in logger.handlers:
        for existing in [f for f in handler.filters if isinstance(f, RunContextFilter)]:
            handler.removeFilter(existing)
        handler.addFilter(context)
    return context


@contextmanager
def log_elapsed(logger: logging.Logger, message: str, **fields: Any) -> Iterator[Dict[str, Any]]:
    """Log ``message`` at DEBUG with the wall time of the block.

    The yielded dict can be filled with extra fields inside the block.
    """
    extra: Dict[str, Any] = dict(fields)
    start = time.perf_counter()
    try:
        yield extra
    finally:
        extra["elapsed_s"] = round(time.perf_counter() - start, 6)
        logger.debug(message, extra=extra)


def get_logger(name: str) -> logging.Logger:
    """Child of the ``specsense`` logger; accepts ``__name__`` or a bare name."""
    if name.startswith(f"{ROOT_LOGGER}."):
        name = name[len(ROOT_LOGGER) + 1:]
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")
