"""Shipped benchmark maps.

`empty`, `simple_like` and `complex_like` are stand-ins for the usual empty / simple /
complex benchmark maps (their exact geometry is not public). `corridor` and `swap4`
are small fixtures with known multi-robot behaviour.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import T_MAX
from .ecd import Reservation
from .errors import ContractError
from .gcsprog import Trajectory, VelocityBounds
from .geom import HPoly, State
from .mrmp import RobotTask
from .stgraph import SpaceTimeGraph, build_graph

# robot footprint apothem and disk obstacle radius used by the catalog
ROBOT_APOTHEM = 0.25
OBSTACLE_RADIUS = 0.3


@dataclass
class MapCatalogEntry:
    name: str
    spatial_sets: List[HPoly]
    v_max: float
    safe_radius: float = 2 * ROBOT_APOTHEM
    t_max: float = T_MAX
    dynamic_obstacles: List[Reservation] = field(default_factory=list)
    robots: List[RobotTask] = field(default_factory=list)
    description: str = ''

    @property
    def d(self) -> int:
        return self.spatial_sets[0].dim

    @property
    def vb(self) -> VelocityBounds:
        return VelocityBounds.symmetric(self.v_max, self.d)

    def graph(self) -> SpaceTimeGraph:
        return build_graph(self.spatial_sets, self.t_max)

    def in_free_space(self, p) -> bool:
        return any(S.contains(p) for S in self.spatial_sets)

    def sample_point(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform point of the union (bounding-box volume weighted, rejection inside each set)."""
        boxes = [S.bbox for S in self.spatial_sets]
        vols = np.array([np.prod(np.maximum(b.hi - b.lo, 1e-12)) for b in boxes])
        while True:
            k = int(rng.choice(len(boxes), p=vols / vols.sum()))
            p = rng.uniform(boxes[k].lo, boxes[k].hi)
            if self.spatial_sets[k].contains(p):
                # sets may overlap: accept with probability 1 / multiplicity
                hits = sum(S.contains(p) for S in self.spatial_sets)
                if hits == 1 or rng.random() < 1.0 / hits:
                    return p


def _box(lo, hi) -> HPoly:
    return HPoly.from_box(lo, hi)


def _task(start, goal) -> RobotTask:
    return RobotTask(State(tuple(start), 0.0), tuple(goal))


def _moving_obstacle(p0, p1, speed: float, apothem: float, t0: float = 0.0) -> Reservation:
    """Constant-velocity obstacle from `p0` to `p1` that then parks at `p1`."""
    p0, p1 = np.asarray(p0, dtype=float), np.asarray(p1, dtype=float)
    t1 = t0 + float(np.max(np.abs(p1 - p0))) / speed
    return Reservation(Trajectory([State(tuple(p0), t0), State(tuple(p1), t1)]), apothem)


def empty_map() -> MapCatalogEntry:
    return MapCatalogEntry(
        name='empty',
        spatial_sets=[_box([0, 0], [10, 10])],
        v_max=0.5,
        description='Single 10 x 10 box.',
    )


def simple_like_map() -> MapCatalogEntry:
    r_obs = OBSTACLE_RADIUS + ROBOT_APOTHEM
    obstacles = [
        _moving_obstacle([1, 1], [9, 1], 0.5, r_obs),
        _moving_obstacle([9, 3], [1, 3], 0.5, r_obs),
        _moving_obstacle([9, 9], [1, 9], 0.5, r_obs),
        _moving_obstacle([1, 7], [9, 7], 0.5, r_obs),
    ]
    return MapCatalogEntry(
        name='simple_like',
        spatial_sets=[
            _box([0, 0], [10, 4]),
            _box([0, 6], [10, 10]),
            _box([0, 0], [2, 10]),
            _box([8, 0], [10, 10]),
        ],
        v_max=1.0,
        dynamic_obstacles=obstacles,
        robots=[_task([1, 5], [9, 5]), _task([9, 5], [1, 5])],
        description='Box with a central block, two corridors and four moving disk obstacles.',
    )


def complex_like_map() -> MapCatalogEntry:
    rows = [(0, 1), (3, 4), (6, 7), (9, 10)]
    cols = [(0, 1), (3, 4), (6, 7), (9, 10)]
    sets = [_box([0, y0], [10, y1]) for y0, y1 in rows]
    for (_, below), (above, _) in zip(rows[:-1], rows[1:]):
        sets += [_box([x0, below], [x1, above]) for x0, x1 in cols]
    return MapCatalogEntry(
        name='complex_like',
        spatial_sets=sets,
        v_max=1.0,
        description='Grid of four horizontal corridors joined by twelve vertical passages.',
    )


def corridor_map() -> MapCatalogEntry:
    return MapCatalogEntry(
        name='corridor',
        spatial_sets=[_box([0, 0], [10, 0.2]), _box([7, 0], [8, 1.2])],
        v_max=1.0,
        robots=[_task([1, 0.1], [9, 0.1]), _task([9, 0.1], [1, 0.1])],
        description='One-robot-wide corridor with a single niche; only robot 0 first works.',
    )


def swap4_map() -> MapCatalogEntry:
    starts = [(1, 5), (5, 1), (9, 5), (5, 9)]
    goals = [(9, 5), (5, 9), (1, 5), (5, 1)]
    return MapCatalogEntry(
        name='swap4',
        spatial_sets=[_box([0, 0], [10, 10])],
        v_max=1.0,
        robots=[_task(s, g) for s, g in zip(starts, goals)],
        description='Four robots exchanging opposite positions through the center.',
    )


MAP_CATALOG: Dict[str, Callable[[], MapCatalogEntry]] = {
    'empty': empty_map,
    'simple_like': simple_like_map,
    'complex_like': complex_like_map,
    'corridor': corridor_map,
    'swap4': swap4_map,
}

MAP_NAMES = list(MAP_CATALOG)


def get_map(name: str) -> MapCatalogEntry:
    if name not in MAP_CATALOG:
        raise ContractError(f'Unknown map {name!r}, expected one of {MAP_NAMES}')
    return MAP_CATALOG[name]()
