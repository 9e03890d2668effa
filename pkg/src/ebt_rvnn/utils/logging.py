"""
Logging for ebt-rvnn

Handlers hang off the ``ebt_rvnn`` package logger, so embedding code (and
pytest's capture) keeps its own root configuration. Records still propagate.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Union

PACKAGE = "ebt_rvnn"
LOG_FILE = "ebt_rvnn.log"

_LEVEL_STYLES = {
    logging.DEBUG: '\033[36m',
    logging.INFO: '\033[32m',
    logging.WARNING: '\033[33m',
    logging.ERROR: '\033[31m',
    logging.CRITICAL: '\033[1;35m',
}
_RESET = '\033[0m'
_DIM = '\033[2m'


class ColoredFormatter(logging.Formatter):
    """Console formatter: colored level, dimmed module path"""

    def __init__(self, fmt=None, datefmt=None, use_colors=True):
        super().__init__(fmt, datefmt)
        self.use_colors = use_colors and sys.stderr.isatty() and os.environ.get("TERM") != "dumb"

    def format(self, record):
        if not self.use_colors:
            return super().format(record)
        # copy, the file handler formats the same record
        record = logging.makeLogRecord(record.__dict__)
        style = _LEVEL_STYLES.get(record.levelno, "")
        record.levelname = f"{style}{record.levelname:<7}{_RESET}"
        record.name = f"{_DIM}{record.name.removeprefix(PACKAGE + '.')}{_RESET}"
        return super().format(record)


def _owned(handler: logging.Handler) -> bool:
    return getattr(handler, "_ebt_rvnn", False)


def setup_logging(
    level: str = "INFO",
    debug: bool = False,
    no_color: bool = False,
    log_dir: Union[str, Path] = "logs",
) -> logging.Logger:
    """Log file under ``log_dir`` always; colored stderr console only in debug mode.

    Calling it again replaces the handlers of the previous call.
    """
    if debug:
        level = "DEBUG"
    log_level = getattr(logging, level.upper())

    logger = logging.getLogger(PACKAGE)
    logger.setLevel(log_level)
    for handler in [h for h in logger.handlers if _owned(h)]:
        logger.removeHandler(handler)
        handler.close()

    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)
    file_handler = logging.FileHandler(log_dir / LOG_FILE, encoding="utf-8")
    file_handler.setFormatter(logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s'))
    handlers = [file_handler]

    # stdout carries reports
    if debug:
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(ColoredFormatter('%(levelname)s %(name)s: %(message)s', use_colors=not no_color))
        handlers.append(console)

    for handler in handlers:
        handler._ebt_rvnn = True
        handler.setLevel(log_level)
        logger.addHandler(handler)

    logger.info(f"Logging initialized at level {logging.getLevelName(log_level)}")
    return logger


def get_logger(name: str) -> logging.Logger:
    """Logger under the package namespace for a module ``__name__``"""
    if name == PACKAGE or name.startswith(PACKAGE + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{PACKAGE}.{name}")
