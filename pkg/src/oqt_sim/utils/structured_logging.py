"""Structured logging with run IDs for tracing experiments across workers."""

import json
import logging
import sys
import uuid
from contextvars import ContextVar
from datetime import datetime, timezone
from typing import Any, Dict, Optional

from pythonjsonlogger import jsonlogger

from oqt_sim import __version__

# Context variable for the run ID
run_id: ContextVar[Optional[str]] = ContextVar("run_id", default=None)


class RunIdFilter(logging.Filter):
    """Add run ID to log records."""

    def filter(self, record: logging.LogRecord) -> bool:
        record.run_id = run_id.get() or "no-run-id"
        return True


class CustomJsonFormatter(jsonlogger.JsonFormatter):
    """Custom JSON formatter for structured logging."""

    def add_fields(
        self,
        log_record: Dict[str, Any],
        record: logging.LogRecord,
        message_dict: Dict[str, Any],
    ) -> None:
        super().add_fields(log_record, record, message_dict)

        log_record["timestamp"] = datetime.now(timezone.utc).isoformat()
        log_record["level"] = record.levelname
        log_record["logger"] = record.name
        log_record["source"] = f"{record.filename}:{record.lineno}"
        log_record["function"] = record.funcName
        log_record["run_id"] = getattr(record, "run_id", "no-run-id")

        log_record["service"] = "oqt-sim"
        log_record["version"] = __version__


def setup_structured_logging(log_level: str = "INFO", json_format: bool = True) -> logging.Logger:
    """Setup structured logging configuration.

    Args:
        log_level: Logging level
        json_format: Whether to use JSON formatting

    Returns:
        Configured root logger
    """
    logger = logging.getLogger()
    logger.setLevel(getattr(logging, log_level.upper()))

    logger.handlers = []

    # stderr keeps stdout free for the summary printed by the CLI
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(getattr(logging, log_level.upper()))
    handler.addFilter(RunIdFilter())

    if json_format:
        formatter: logging.Formatter = CustomJsonFormatter(
            "%(timestamp)s %(level)s %(name)s %(message)s"
        )
    else:
        formatter = logging.Formatter(
            "%(asctime)s | %(levelname)s | %(run_id)s | %(name)s | %(message)s"
        )

    handler.setFormatter(formatter)
    logger.addHandler(handler)

    return logger


class LogContext:
    """Context manager scoping a run ID."""

    def __init__(self, rid: Optional[str] = None):
        self.rid = rid or uuid.uuid4().hex[:12]
        self.token: Optional[Any] = None

    def __enter__(self) -> "LogContext":
        self.token = run_id.set(self.rid)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        if self.token:
            run_id.reset(self.token)


class StructuredLogger:
    """Wrapper around standard logger with structured logging support."""

    def __init__(self, name: str):
        self.logger = logging.getLogger(name)

    def _log(self, level: int, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        if extra:
            structured_msg = {"message": message, "extra": extra}
            self.logger.log(level, json.dumps(structured_msg, default=str))
        else:
            self.logger.log(level, message)

    def isEnabledFor(self, level: int) -> bool:
        return self.logger.isEnabledFor(level)

    def debug(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log(logging.DEBUG, message, extra)

    def info(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log(logging.INFO, message, extra)

    def warning(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log(logging.WARNING, message, extra)

    def error(self, message: str, extra: Optional[Dict[str, Any]] = None) -> None:
        self._log(logging.ERROR, message, extra)


def get_logger(name: str) -> StructuredLogger:
    """Get structured logger instance."""
    return StructuredLogger(name)
