"""Instance / solution files, random instance generation and the benchmark runner."""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .constants import MAX_REJECTIONS, SCHEMA_VERSION, TIME_BUDGET_S
from .core import File
from .ecd import Reservation, canonicalize, reserve_all, vertex_segment_sequence
from .errors import ContractError, CoverageError, CrowdingError, LoadError, STGCSError
from .gcsprog import SolveParams, VelocityBounds
from .geom import HPoly, State
from .maps import MapCatalogEntry, get_map
from .mrmp import MrmpInstance, PlanResult, RobotTask, Solution, plan
from .stgraph import build_graph, goal_vertices, start_vertices
from .type_utils import Json, PathLike
from ..utils import logger, MultiProcessPipeline, BenchConfig

BENCH_COLUMNS = [
    'map', 'n', 'instance_id', 'method', 'success', 'runtime_s',
    'soc', 'makespan', 'nodes_expanded', 'graph_edges_final',
]

SUMMARY_COLUMNS = [
    'map', 'n', 'method', 'solved', 'total', 'success_rate',
    'averaged_over', 'mean_runtime_s', 'mean_soc', 'mean_makespan',
]

# methods solving fewer instances of a cell than this are left out of the averages
MIN_SOLVED_FOR_AVERAGE = 3


def fmt(v: Optional[float]) -> str:
    return '' if v is None else f'{v:.6g}'


@dataclass
class InstanceFile:
    """Canonical, serializable form of a planning instance."""
    map_sets: List[HPoly]
    t_max: float
    vb: VelocityBounds
    safe_radius: float
    robots: List[RobotTask]
    dynamic_obstacles: List[Reservation] = field(default_factory=list)
    seed: int = 0
    map_name: str = ''

    @property
    def d(self) -> int:
        return self.map_sets[0].dim

    @classmethod
    def from_map(cls, entry: MapCatalogEntry, robots: Optional[List[RobotTask]] = None, seed: int = 0) -> 'InstanceFile':
        return cls(
            map_sets=list(entry.spatial_sets), t_max=entry.t_max, vb=entry.vb, safe_radius=entry.safe_radius,
            robots=list(entry.robots if robots is None else robots),
            dynamic_obstacles=list(entry.dynamic_obstacles), seed=seed, map_name=entry.name,
        )

    def to_dict(self) -> Json:
        return {
            'schema': SCHEMA_VERSION,
            'd': self.d,
            'map': {'name': self.map_name, 'sets': [S.to_dict() for S in self.map_sets]},
            't_max': self.t_max,
            'v_min': list(self.vb.v_min),
            'v_max': list(self.vb.v_max),
            'safe_radius': self.safe_radius,
            'robots': [r.to_dict() for r in self.robots],
            'dynamic_obstacles': [o.to_dict() for o in self.dynamic_obstacles],
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data) -> 'InstanceFile':
        try:
            if int(data.get('schema', -1)) != SCHEMA_VERSION:
                raise LoadError(f'Unsupported instance schema {data.get("schema")!r}, expected {SCHEMA_VERSION}')
            sets = [HPoly.from_dict(s) for s in data['map']['sets']]
            if not sets:
                raise LoadError('Instance map has no spatial sets')
            d = int(data['d'])
            if any(S.dim != d for S in sets):
                raise LoadError(f'Map sets do not all have dimension {d}')
            inst = cls(
                map_sets=sets,
                t_max=float(data['t_max']),
                vb=VelocityBounds(tuple(data['v_min']), tuple(data['v_max'])),
                safe_radius=float(data['safe_radius']),
                robots=[RobotTask.from_dict(r) for r in data['robots']],
                dynamic_obstacles=[Reservation.from_dict(o) for o in data.get('dynamic_obstacles', [])],
                seed=int(data.get('seed', 0)),
                map_name=data['map'].get('name', ''),
            )
        except LoadError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            raise LoadError(f'Malformed instance: {e!r}') from e
        if inst.vb.d != d or any(r.start.d != d for r in inst.robots):
            raise LoadError(f'Velocity bounds or robots do not match dimension {d}')
        return inst

    def to_instance(self, solve_params: Optional[SolveParams] = None, time_budget: float = TIME_BUDGET_S) -> MrmpInstance:
        """Build the graph, reserve the dynamic obstacles and check the robots against it."""
        try:
            static = build_graph(self.map_sets, self.t_max)
        except ContractError as e:
            raise LoadError(f'Inconsistent map geometry: {e}') from e
        for k, obs in enumerate(self.dynamic_obstacles):
            try:
                vertex_segment_sequence(static, canonicalize(obs.trajectory, self.t_max), strict=True)
            except (CoverageError, ContractError) as e:
                raise LoadError(f'Dynamic obstacle {k} leaves the map: {e}') from e
        G = reserve_all(static, self.dynamic_obstacles) if self.dynamic_obstacles else static
        for i, task in enumerate(self.robots):
            if not start_vertices(G, task.start):
                raise LoadError(f'Robot {i} starts outside the free space at {task.start}')
        try:
            return MrmpInstance(
                graph=G, robots=list(self.robots), vb=self.vb, safe_radius=self.safe_radius,
                time_budget=time_budget, solve_params=solve_params or SolveParams(),
                dynamic_obstacles=list(self.dynamic_obstacles), static_graph=static, name=self.map_name,
            )
        except ContractError as e:
            raise LoadError(str(e)) from e


def read_instance_file(path: PathLike) -> InstanceFile:
    try:
        data = File.jsonload(path)
    except (OSError, ValueError) as e:
        raise LoadError(f'Cannot read instance {path}: {e}') from e
    if not isinstance(data, dict):
        raise LoadError(f'Instance {path} is not a JSON object')
    return InstanceFile.from_dict(data)


def load_instance(path: PathLike, solve_params: Optional[SolveParams] = None, time_budget: float = TIME_BUDGET_S) -> MrmpInstance:
    inst = read_instance_file(path).to_instance(solve_params, time_budget)
    logger.info(f'Loaded {File.base(path)}: {inst.n} robots, {inst.graph}')
    return inst


def save_instance(inst: InstanceFile, path: PathLike) -> PathLike:
    return File.jsondump(inst.to_dict(), path)


def save_solution(solution: Solution, path: PathLike) -> PathLike:
    return File.jsondump(solution.to_dict(), path)


def load_solution(path: PathLike) -> Solution:
    try:
        data = File.jsonload(path)
        return Solution.from_dict(data)
    except (OSError, KeyError, TypeError, ValueError) as e:
        raise LoadError(f'Cannot read solution {path}: {e}') from e


def _too_close(p: np.ndarray, others: Sequence[np.ndarray], sep: float) -> bool:
    return any(np.max(np.abs(p - q)) < sep for q in others)


def gen_instances(map_name: str, n: int, count: int = 12, seed: int = 0) -> List[InstanceFile]:
    """Rejection-sample `count` instances with `n` robots; deterministic under `seed`.

    Starts (at t = 0) and goals are each pairwise separated by `2r`; every start lies in
    the free space at t = 0 and every goal admits a goal vertex, dynamic obstacles included.
    """
    if n < 1 or count < 0:
        raise ContractError(f'Need n >= 1 and count >= 0, got n={n}, count={count}')
    entry = get_map(map_name)
    G = entry.graph()
    if entry.dynamic_obstacles:
        G = reserve_all(G, entry.dynamic_obstacles)
    rng = np.random.default_rng(seed)
    sep = 2 * entry.safe_radius
    out = []
    for idx in range(count):
        rejections = 0

        def draw(accept, taken):
            nonlocal rejections
            while True:
                p = entry.sample_point(rng)
                if not _too_close(p, taken, sep) and accept(p):
                    return p
                rejections += 1
                if rejections >= MAX_REJECTIONS:
                    raise CrowdingError(f'Could not place {n} robots on {map_name} after {rejections} rejections')

        starts, goals = [], []
        for _ in range(n):
            starts.append(draw(lambda p: bool(start_vertices(G, State(tuple(p), 0.0))), starts))
        for _ in range(n):
            goals.append(draw(lambda p: bool(goal_vertices(G, p)), goals))
        robots = [RobotTask(State(tuple(s), 0.0), tuple(g)) for s, g in zip(starts, goals)]
        out.append(InstanceFile.from_map(entry, robots, seed=seed + idx))
    logger.debug(f'Generated {count} instances on {map_name} with {n} robots')
    return out


@dataclass
class BenchRow:
    map: str
    n: int
    instance_id: int
    method: str
    success: bool
    runtime_s: float
    soc: Optional[float] = None
    makespan: Optional[float] = None
    nodes_expanded: int = 0
    graph_edges_final: int = 0

    @property
    def sort_key(self) -> Tuple:
        return self.map, self.n, self.instance_id, self.method

    def to_row(self) -> Dict[str, Any]:
        return {
            'map': self.map, 'n': self.n, 'instance_id': self.instance_id, 'method': self.method,
            'success': int(self.success), 'runtime_s': fmt(self.runtime_s),
            'soc': fmt(self.soc if self.success else None),
            'makespan': fmt(self.makespan if self.success else None),
            'nodes_expanded': self.nodes_expanded, 'graph_edges_final': self.graph_edges_final,
        }

    @classmethod
    def from_result(cls, map_name: str, n: int, instance_id: int, result: PlanResult) -> 'BenchRow':
        m = result.solution.metrics if result.success else {}
        return cls(
            map=map_name, n=n, instance_id=instance_id, method=result.method, success=result.success,
            runtime_s=result.runtime_s, soc=m.get('soc'), makespan=m.get('makespan'),
            nodes_expanded=result.nodes_expanded, graph_edges_final=result.graph_edges_final,
        )


def _run_job(job: Tuple) -> BenchRow:
    """One (instance, method) cell; failures of any kind become unsuccessful rows."""
    map_name, n, idx, method, inst_data, params, budget_s = job
    try:
        inst = InstanceFile.from_dict(inst_data).to_instance(SolveParams(**params), budget_s)
        return BenchRow.from_result(map_name, n, idx, plan(inst, method))
    except STGCSError as e:
        logger.warning(f'{map_name} n={n} #{idx} {method}: {e}')
        return BenchRow(map_name, n, idx, method, False, 0.0)


def bench_jobs(config: BenchConfig) -> List[Tuple]:
    params = {'epsilon': config.epsilon, 'path_budget': config.path_budget, 'mode': config.solver, 'rng_seed': config.seed}
    jobs = []
    for map_name, n in config.cells:
        for idx, inst in enumerate(gen_instances(map_name, n, config.count, config.seed)):
            data = inst.to_dict()
            jobs.extend((map_name, n, idx, method, data, params, config.budget_s) for method in config.methods)
    return jobs


def run_bench(config: BenchConfig) -> List[BenchRow]:
    """Run the whole matrix; rows come back ordered by (map, n, instance_id, method)."""
    jobs = bench_jobs(config)
    logger.info(f'Running {len(jobs)} bench cells with {config.workers} workers')
    rows = MultiProcessPipeline(jobs, _run_job, num_cores=config.workers, desc='Bench')
    rows.sort(key=lambda r: r.sort_key)
    if config.out_dir:
        write_bench_csv(rows, File.join(config.out_dir, 'bench.csv'))
        File.csvwrite(aggregate_rows(rows), File.join(config.out_dir, 'summary.csv'), keys=SUMMARY_COLUMNS)
        config.save_config(File.join(config.out_dir, 'bench.yaml'))
    return rows


def write_bench_csv(rows: Iterable[BenchRow], path: PathLike) -> PathLike:
    return File.csvwrite([r.to_row() for r in rows], path, keys=BENCH_COLUMNS)


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def aggregate_rows(rows: Iterable[BenchRow], min_solved: int = MIN_SOLVED_FOR_AVERAGE) -> List[Dict[str, Any]]:
    """Per (map, n, method): success rate, and means over the instances every qualifying method solved."""
    cells: Dict[Tuple[str, int], Dict[str, List[BenchRow]]] = defaultdict(lambda: defaultdict(list))
    for r in rows:
        cells[(r.map, r.n)][r.method].append(r)
    out = []
    for (map_name, n) in sorted(cells):
        by_method = cells[(map_name, n)]
        solved = {m: {r.instance_id for r in rs if r.success} for m, rs in by_method.items()}
        qualifying = [m for m in by_method if len(solved[m]) >= min_solved]
        common = set.intersection(*(solved[m] for m in qualifying)) if qualifying else set()
        for method in sorted(by_method):
            rs = by_method[method]
            row = {
                'map': map_name, 'n': n, 'method': method,
                'solved': len(solved[method]), 'total': len(rs),
                'success_rate': fmt(len(solved[method]) / len(rs)) if rs else '',
                'averaged_over': len(common) if method in qualifying else 0,
                'mean_runtime_s': '', 'mean_soc': '', 'mean_makespan': '',
            }
            if method in qualifying and common:
                picked = [r for r in rs if r.success and r.instance_id in common]
                row['mean_runtime_s'] = fmt(_mean([r.runtime_s for r in picked]))
                row['mean_soc'] = fmt(_mean([r.soc for r in picked]))
                row['mean_makespan'] = fmt(_mean([r.makespan for r in picked]))
            out.append(row)
    return out
