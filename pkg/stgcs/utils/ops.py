import time

from . import logger


class Timer:
    """Wall-clock stopwatch used for runtime metrics and time budgets."""

    def __init__(self, budget_s=None):
        self.budget_s = budget_s
        self.start = time.perf_counter()

    @property
    def elapsed(self) -> float:
        return time.perf_counter() - self.start

    @property
    def expired(self) -> bool:
        return self.budget_s is not None and self.elapsed >= self.budget_s

    def remaining(self) -> float:
        if self.budget_s is None:
            return float('inf')
        return max(0.0, self.budget_s - self.elapsed)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        logger.debug(f'Timer finished in {self.elapsed:.3f}s')
        return False
