import copy
from dataclasses import dataclass, asdict, field, fields
from typing import Any, Dict, List, Optional

from . import logger
from ..src.core import File


def default_field(obj):
    return field(default_factory=lambda: copy.copy(obj))


@dataclass
class BenchConfig:
    """Benchmark matrix: maps x robot counts x methods, plus run settings."""
    maps: List[str] = default_field(['empty'])
    n_range: List[int] = default_field([1, 2, 3, 4])
    methods: List[str] = default_field(['sp', 'rp', 'pbs'])
    count: int = 12
    seed: int = 0
    budget_s: float = 150.0
    solver: str = 'heuristic'
    epsilon: float = 1e-3
    path_budget: Optional[int] = None
    workers: int = 1
    out_dir: Optional[str] = None

    @property
    def config(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def cells(self):
        for map_name in self.maps:
            for n in self.n_range:
                yield map_name, n

    def override(self, **kwargs) -> 'BenchConfig':
        names = {f.name for f in fields(self)}
        for k, v in kwargs.items():
            if v is None:
                continue
            if k not in names:
                raise ValueError(f'Unknown bench option {k}')
            setattr(self, k, v)
        return self

    def save_config(self, path):
        logger.info(f'Saving Bench Config to {path}')
        File.ydump(self.config, path)

    @classmethod
    def load_config(cls, path) -> 'BenchConfig':
        if not File.exists(path):
            logger.info(f'Config does not exist {path}. Using defaults')
            return cls()
        logger.info(f'Loading Bench Config from {path}')
        conf = File.yload(path) or {}
        return cls().override(**conf)
