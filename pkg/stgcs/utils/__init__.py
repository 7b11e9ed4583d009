from . import logging
from .logging import get_logger, set_verbosity

logger = get_logger()
_enable_pbar = False

def enable_progress(enable: bool = True):
    global _enable_pbar
    _enable_pbar = enable

def progress_enabled() -> bool:
    return _enable_pbar

from . import ops
from .ops import Timer

from . import multi
from .multi import MultiProcessPipeline

from . import ds
from .ds import BenchConfig
