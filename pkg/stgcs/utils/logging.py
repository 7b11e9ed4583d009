# Library logger: one colored stdout handler, configured once.

import threading
import os
import sys
import logging
from typing import Optional, Union

_lock = threading.Lock()
_root_logger: Optional[logging.Logger] = None
_default_name = "STGCS"

LOG_LEVEL = os.environ.get("STGCS_LOG_LEVEL", "info")
LINE_TEMPLATE = "%(color_on)s[{name}] %(funcName)-5s%(color_off)s: %(message)s"


class LogFormatter(logging.Formatter):

    COLOR_CODES = {
        logging.CRITICAL: "\033[38;5;196m", # red
        logging.ERROR:    "\033[38;5;9m",
        logging.WARNING:  "\033[38;5;11m", # yellow
        logging.INFO:     "\033[38;5;111m", # light blue
        logging.DEBUG:    "\033[1;30m", # dark gray
    }
    RESET_CODE = "\033[0m"

    def __init__(self, color: bool, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.color = color

    def format(self, record, *args, **kwargs):
        colored = self.color and record.levelno in self.COLOR_CODES
        record.color_on = self.COLOR_CODES[record.levelno] if colored else ""
        record.color_off = self.RESET_CODE if colored else ""
        return super().format(record, *args, **kwargs)


def _console_handler(name: str, level: str, stream=None) -> logging.Handler:
    stream = stream or sys.stdout
    handler = logging.StreamHandler(stream)
    handler.setLevel(level.upper())
    isatty = getattr(stream, 'isatty', None)
    handler.setFormatter(LogFormatter(color=bool(isatty and isatty()), fmt=LINE_TEMPLATE.format(name=name)))
    return handler


def _configure_library_root_logger(name: str = _default_name) -> None:
    global _root_logger
    with _lock:
        if _root_logger:
            return
        logger = logging.getLogger(name)
        logger.setLevel(logging.DEBUG)
        logger.addHandler(_console_handler(name, LOG_LEVEL))
        logger.propagate = False
        _root_logger = logger


def get_logger(name: Optional[str] = _default_name) -> logging.Logger:
    """
    Return the library logger, configuring it on first use.
    """
    _configure_library_root_logger(name or _default_name)
    return _root_logger


def set_verbosity(level: Union[int, str]) -> None:
    """Set the console level of the library logger (e.g. `"debug"` or `logging.WARNING`)."""
    if isinstance(level, str):
        level = level.upper()
    for handler in get_logger().handlers:
        handler.setLevel(level)
