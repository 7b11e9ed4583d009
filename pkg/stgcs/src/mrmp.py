"""Multi-robot planning on top of the single-robot solver.

Robots are axis-aligned squares; two robots collide when their centers come closer
than the safe radius `r` in the infinity norm. Higher-priority trajectories are
reserved into the graph (`ecd.reserve`) before a lower-priority robot is planned.

Planners:
    sp   fixed priority order
    rp   random unused priority orders until one works or the budget runs out
    pbs  depth-first search over partial priority orders
"""

import itertools
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .constants import COLLISION_SLACK, PARTITION_TOL, TIME_BUDGET_S, VALIDATION_DT
from .ecd import Reservation, canonicalize, reserve, vertex_segment_sequence
from .errors import ContractError, CoverageError, SolverError
from .gcsprog import FailureReason, SolveParams, SolveResult, Trajectory, VelocityBounds, solve_stgcs
from .geom import State
from .stgraph import SpaceTimeGraph
from .type_utils import Json
from ..utils import logger, Timer

RobotPair = Tuple[int, int]


@dataclass(frozen=True)
class RobotTask:
    start: State
    goal: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, 'goal', tuple(float(v) for v in np.ravel(self.goal)))
        if len(self.goal) != self.start.d:
            raise ContractError(f'Goal has dimension {len(self.goal)}, start has {self.start.d}')

    def to_dict(self) -> Json:
        return {'start': self.start.to_dict(), 'goal': list(self.goal)}

    @classmethod
    def from_dict(cls, data) -> 'RobotTask':
        return cls(State.from_dict(data['start']), tuple(data['goal']))


@dataclass
class MrmpInstance:
    """A ready-to-plan instance; `graph` already has the dynamic obstacles reserved."""
    graph: SpaceTimeGraph
    robots: List[RobotTask]
    vb: VelocityBounds
    safe_radius: float
    time_budget: float = TIME_BUDGET_S
    solve_params: SolveParams = field(default_factory=SolveParams)
    dynamic_obstacles: List[Reservation] = field(default_factory=list)
    static_graph: Optional[SpaceTimeGraph] = None
    name: str = ''

    def __post_init__(self):
        if not self.safe_radius > 0:
            raise ContractError(f'safe_radius must be positive, got {self.safe_radius}')
        if self.static_graph is None:
            self.static_graph = self.graph
        for (i, a), (j, b) in itertools.combinations(enumerate(self.robots), 2):
            if np.max(np.abs(a.start.pos - b.start.pos)) < self.safe_radius - COLLISION_SLACK:
                raise ContractError(f'Robots {i} and {j} start closer than the safe radius {self.safe_radius}')

    @property
    def n(self) -> int:
        return len(self.robots)

    @property
    def t_max(self) -> float:
        return self.graph.t_max


@dataclass(frozen=True)
class PriorityNode:
    prec: FrozenSet[RobotPair]
    trajectories: Tuple[Trajectory, ...]

    @property
    def soc(self) -> float:
        return sum(t.arrival_time for t in self.trajectories)


@dataclass
class Solution:
    trajectories: List[Trajectory]
    metrics: Dict[str, float] = field(default_factory=dict)
    method: str = ''
    seed: int = 0

    def to_dict(self) -> Json:
        return {
            'trajectories': [t.to_dict() for t in self.trajectories],
            'metrics': dict(self.metrics),
            'method': self.method,
            'seed': self.seed,
        }

    @classmethod
    def from_dict(cls, data) -> 'Solution':
        return cls(
            trajectories=[Trajectory.from_dict(t) for t in data['trajectories']],
            metrics=dict(data.get('metrics', {})),
            method=data.get('method', ''),
            seed=int(data.get('seed', 0)),
        )


@dataclass
class PlanResult:
    solution: Optional[Solution] = None
    method: str = ''
    reason: Optional[str] = None
    failed_robot: Optional[int] = None
    nodes_expanded: int = 0
    permutations_tried: int = 0
    graph_edges_final: int = 0
    runtime_s: float = 0.0

    @property
    def success(self) -> bool:
        return self.solution is not None

    def to_report(self) -> Json:
        return {
            'method': self.method,
            'success': self.success,
            'reason': self.reason,
            'failed_robot': self.failed_robot,
            'nodes_expanded': self.nodes_expanded,
            'permutations_tried': self.permutations_tried,
            'runtime_s': self.runtime_s,
            'metrics': self.solution.metrics if self.solution else None,
        }


@dataclass
class PbsOptions:
    # default: (i < j) pushed before (j < i), so (j < i) is expanded first
    reverse_children: bool = False
    use_cache: bool = True


# -- collision checking ---------------------------------------------------------------

def _breakpoints(t1: Trajectory, t2: Trajectory, t_max: float) -> np.ndarray:
    hi = max(t_max, t1.end.t, t2.end.t)
    ts = np.concatenate([[0.0, hi], t1.times, t2.times])
    return np.unique(np.clip(ts, 0.0, hi))


def collide(t1: Trajectory, t2: Trajectory, r: float, t_max: float) -> Optional[float]:
    """Earliest time the two robots are closer than `r` (infinity norm), or None.

    Between merged breakpoints the offset `dp(t)` is affine, so each coordinate's
    `|dp_k| < r` is an open time interval; their intersection is the collision set.
    """
    thr = r - COLLISION_SLACK
    ts = _breakpoints(t1, t2, t_max)
    if ts.shape[0] == 1:
        dp = t1.position_at(ts[0]) - t2.position_at(ts[0])
        return float(ts[0]) if np.max(np.abs(dp)) < thr else None
    d_all = t1.sample(ts) - t2.sample(ts)
    for a, b, da, db in zip(ts[:-1], ts[1:], d_all[:-1], d_all[1:]):
        lo, hi = -np.inf, np.inf
        g = db - da
        for k in range(da.shape[0]):
            if abs(g[k]) <= 1e-15:
                if abs(da[k]) >= thr:
                    lo, hi = np.inf, -np.inf
                    break
                continue
            s0, s1 = sorted(((-thr - da[k]) / g[k], (thr - da[k]) / g[k]))
            lo, hi = max(lo, s0), min(hi, s1)
        if lo < hi and lo < 1.0 and hi > 0.0:
            return float(a + max(lo, 0.0) * (b - a))
    return None


def min_separation(t1: Trajectory, t2: Trajectory, dt: float = VALIDATION_DT, t_max: float = 0.0) -> Tuple[float, float]:
    """Smallest sampled infinity-norm distance and the time it occurs."""
    hi = max(t_max, t1.end.t, t2.end.t)
    ts = np.union1d(np.arange(0.0, hi, dt), _breakpoints(t1, t2, t_max))
    sep = np.max(np.abs(t1.sample(ts) - t2.sample(ts)), axis=-1)
    k = int(np.argmin(sep))
    return float(sep[k]), float(ts[k])


def first_collision(trajectories: Sequence[Trajectory], r: float, t_max: float) -> Optional[Tuple[float, int, int]]:
    """Earliest colliding pair as `(t, i, j)`, ties broken by robot indices."""
    hits = []
    for i, j in itertools.combinations(range(len(trajectories)), 2):
        t = collide(trajectories[i], trajectories[j], r, t_max)
        if t is not None:
            hits.append((t, i, j))
    return min(hits) if hits else None


# -- planners -------------------------------------------------------------------------

def metrics(solution) -> Dict[str, float]:
    """Sum of costs and makespan; a robot's cost is its goal-arrival time."""
    trajs = solution.trajectories if isinstance(solution, Solution) else solution
    costs = [t.arrival_time for t in trajs]
    return {'soc': float(sum(costs)), 'makespan': float(max(costs)) if costs else 0.0}


def _make_solution(trajs: Sequence[Trajectory], method: str, seed: int, runtime_s: float) -> Solution:
    m = metrics(list(trajs))
    m['runtime'] = runtime_s
    return Solution(list(trajs), m, method, seed)


def _solve_robot(instance: MrmpInstance, G: SpaceTimeGraph, i: int) -> SolveResult:
    task = instance.robots[i]
    return solve_stgcs(G, task.start, task.goal, instance.vb, instance.solve_params)


def sp(instance: MrmpInstance, order: Optional[Sequence[int]] = None, timer: Optional[Timer] = None) -> PlanResult:
    """Plan robots one by one in `order`, reserving each trajectory before the next."""
    order = list(range(instance.n)) if order is None else list(order)
    if sorted(order) != list(range(instance.n)):
        raise ContractError(f'{order} is not a permutation of the {instance.n} robots')
    timer = timer or Timer(instance.time_budget)
    G = instance.graph.copy()
    trajs: List[Optional[Trajectory]] = [None] * instance.n
    for i in order:
        if timer.expired:
            return PlanResult(method='sp', reason='time_budget', failed_robot=i, runtime_s=timer.elapsed)
        res = _solve_robot(instance, G, i)
        if not res.success:
            logger.debug(f'SP order {order}: robot {i} failed ({res.reason.value})')
            return PlanResult(method='sp', reason=res.reason.value, failed_robot=i,
                              graph_edges_final=G.num_edges, runtime_s=timer.elapsed)
        trajs[i] = res.trajectory
        try:
            reserve(G, Reservation(res.trajectory, instance.safe_radius), inplace=True)
        except SolverError as e:
            logger.warning(f'SP order {order}: reserving robot {i} failed: {e}')
            return PlanResult(method='sp', reason=FailureReason.SOLVER_FAILURE.value, failed_robot=i,
                              graph_edges_final=G.num_edges, runtime_s=timer.elapsed)
    seed = instance.solve_params.rng_seed
    return PlanResult(solution=_make_solution(trajs, 'sp', seed, timer.elapsed), method='sp',
                      graph_edges_final=G.num_edges, runtime_s=timer.elapsed)


def rp(instance: MrmpInstance, seed: Optional[int] = None) -> PlanResult:
    """Sequential planning over random, never repeated, priority orders."""
    seed = instance.solve_params.rng_seed if seed is None else seed
    rng = np.random.default_rng(seed)
    timer = Timer(instance.time_budget)
    n = instance.n
    total = math.factorial(n)
    tried = set()
    last: Optional[PlanResult] = None
    while len(tried) < total and not timer.expired:
        if total <= 5040:
            remaining = [p for p in itertools.permutations(range(n)) if p not in tried]
            order = remaining[int(rng.integers(len(remaining)))]
        else:
            order = tuple(int(v) for v in rng.permutation(n))
            if order in tried:
                continue
        tried.add(order)
        last = sp(instance, order, timer=timer)
        if last.success:
            last.method = last.solution.method = 'rp'
            last.solution.seed = seed
            break
    result = last or PlanResult(reason='time_budget')
    result.method = 'rp'
    result.permutations_tried = len(tried)
    result.runtime_s = timer.elapsed
    if not result.success and len(tried) == total:
        result.reason = 'permutations_exhausted'
    elif not result.success and timer.expired:
        result.reason = 'time_budget'
    logger.info(f'RP: success={result.success} after {len(tried)} orders in {result.runtime_s:.2f}s')
    return result


class _PbsSearch:
    """Depth-first priority-based search state for one instance."""

    def __init__(self, instance: MrmpInstance, options: PbsOptions):
        self.instance = instance
        self.options = options
        self.cache: Dict[Tuple, Optional[Trajectory]] = {}
        self.timer = Timer(instance.time_budget)
        self.expanded = 0
        self.last_graph_edges = instance.graph.num_edges

    def plan(self, robot: int, higher: Sequence[int], trajs: Sequence[Trajectory]) -> Optional[Trajectory]:
        """Plan `robot` against a fresh graph with all `higher` trajectories reserved."""
        higher = sorted(higher)
        key = (robot, tuple((h, trajs[h].key()) for h in higher))
        if self.options.use_cache and key in self.cache:
            return self.cache[key]
        G = self.instance.graph.copy()
        try:
            for h in higher:
                reserve(G, Reservation(trajs[h], self.instance.safe_radius), inplace=True)
        except SolverError as e:
            logger.warning(f'PBS: reserving {higher} for robot {robot} failed: {e}')
            self.cache[key] = None
            return None
        res = _solve_robot(self.instance, G, robot)
        self.last_graph_edges = G.num_edges
        traj = res.trajectory if res.success else None
        self.cache[key] = traj
        return traj

    def update_node(self, prec: FrozenSet[RobotPair], trajs: Tuple[Trajectory, ...], lo: int) -> Optional[Tuple[Trajectory, ...]]:
        D = nx.DiGraph()
        D.add_nodes_from(range(self.instance.n))
        D.add_edges_from(prec)
        affected = {lo} | nx.descendants(D, lo)
        out = list(trajs)
        r, t_max = self.instance.safe_radius, self.instance.t_max
        for k in nx.lexicographical_topological_sort(D.subgraph(affected)):
            higher = nx.ancestors(D, k)
            if not any(collide(out[k], out[h], r, t_max) is not None for h in higher):
                continue
            new = self.plan(k, higher, out)
            if new is None:
                return None
            out[k] = new
        return tuple(out)

    def children(self, node: PriorityNode, i: int, j: int) -> List[PriorityNode]:
        """Children for `i < j` and `j < i`, in push order."""
        kids = []
        for hi, lo in ((i, j), (j, i)):
            prec = node.prec | {(hi, lo)}
            if not nx.is_directed_acyclic_graph(nx.DiGraph(list(prec))):
                continue
            trajs = self.update_node(prec, node.trajectories, lo)
            if trajs is None:
                logger.debug(f'PBS child {hi}<{lo} has no solution')
                continue
            kids.append(PriorityNode(frozenset(prec), trajs))
        if self.options.reverse_children:
            kids.reverse()
        return kids

    def run(self) -> PlanResult:
        inst = self.instance
        root = []
        for i in range(inst.n):
            traj = self.plan(i, [], [])
            if traj is None:
                return self._fail('no_single_robot_path', failed_robot=i)
            root.append(traj)
        stack = [PriorityNode(frozenset(), tuple(root))]
        while stack:
            if self.timer.expired:
                return self._fail('time_budget')
            node = stack.pop()
            hit = first_collision(node.trajectories, inst.safe_radius, inst.t_max)
            if hit is None:
                sol = _make_solution(node.trajectories, 'pbs', inst.solve_params.rng_seed, self.timer.elapsed)
                logger.info(f'PBS: solved {inst.n} robots with {self.expanded} expansions in {self.timer.elapsed:.2f}s')
                return PlanResult(solution=sol, method='pbs', nodes_expanded=self.expanded,
                                  graph_edges_final=self.last_graph_edges, runtime_s=self.timer.elapsed)
            t, i, j = hit
            self.expanded += 1
            logger.debug(f'PBS node |prec|={len(node.prec)}: robots {i},{j} collide at t={t:.4f}')
            stack.extend(self.children(node, i, j))
        return self._fail('search_exhausted')

    def _fail(self, reason: str, failed_robot: Optional[int] = None) -> PlanResult:
        logger.info(f'PBS: failed ({reason}) after {self.expanded} expansions')
        return PlanResult(method='pbs', reason=reason, failed_robot=failed_robot, nodes_expanded=self.expanded,
                          graph_edges_final=self.last_graph_edges, runtime_s=self.timer.elapsed)


def pbs(instance: MrmpInstance, options: Optional[PbsOptions] = None) -> PlanResult:
    """Priority-based search: branch on the first collision by adding one priority pair."""
    return _PbsSearch(instance, options or PbsOptions()).run()


PLANNERS = {
    'sp': lambda inst: sp(inst),
    'rp': lambda inst: rp(inst),
    'pbs': lambda inst: pbs(inst),
}


def plan(instance: MrmpInstance, method: str) -> PlanResult:
    if method not in PLANNERS:
        raise ContractError(f'Unknown method {method!r}, expected one of {sorted(PLANNERS)}')
    return PLANNERS[method](instance)


# -- validation -----------------------------------------------------------------------

@dataclass
class Violation:
    kind: str
    robot: int
    t: Optional[float] = None
    other: Optional[int] = None
    detail: str = ''

    def to_dict(self) -> Json:
        return {'kind': self.kind, 'robot': self.robot, 't': self.t, 'other': self.other, 'detail': self.detail}


@dataclass
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> List[str]:
        return sorted({v.kind for v in self.violations})

    def to_dict(self) -> Json:
        return {'ok': self.ok, 'violations': [v.to_dict() for v in self.violations]}


def validate(solution: Solution, instance: MrmpInstance, dt: float = VALIDATION_DT, tol: float = 1e-6) -> ValidationReport:
    """Independent check of a multi-robot solution; never raises for bad solutions."""
    report = ValidationReport()
    add = report.violations.append
    trajs = solution.trajectories
    r, t_max = instance.safe_radius, instance.t_max
    if len(trajs) != instance.n:
        add(Violation('robot_count', -1, detail=f'{len(trajs)} trajectories for {instance.n} robots'))
        return report

    for i, j in itertools.combinations(range(instance.n), 2):
        t = collide(trajs[i], trajs[j], r, t_max)
        if t is not None:
            add(Violation('collision', i, t, j))
        sep, ts = min_separation(trajs[i], trajs[j], dt, t_max)
        if sep < r - tol:
            add(Violation('sampled_collision', i, ts, j, f'separation {sep:.6g} < {r}'))

    for i, (traj, task) in enumerate(zip(trajs, instance.robots)):
        times = traj.times
        if np.any(np.diff(times) <= 0):
            add(Violation('time_order', i, detail='time stamps are not strictly increasing'))
            continue
        if not traj.start.close_to(task.start, tol):
            add(Violation('start', i, traj.start.t, detail=f'{traj.start} != {task.start}'))
        if np.max(np.abs(traj.end.pos - np.asarray(task.goal))) > tol:
            add(Violation('goal', i, traj.end.t, detail=f'{traj.end.p} != {task.goal}'))
        if traj.end.t > t_max + tol:
            add(Violation('horizon', i, traj.end.t))
        for seg in traj.segments():
            if not instance.vb.admits(seg, tol=PARTITION_TOL):
                add(Violation('velocity', i, seg.x.t, detail=f'velocity {seg.velocity.tolist()}'))
        try:
            vertex_segment_sequence(instance.static_graph, canonicalize(traj, t_max), strict=True)
        except CoverageError as e:
            add(Violation('containment', i, e.gap[0] if e.gap else None, detail=str(e)))
        except ContractError:
            # outside [0, t_max]: already reported as start / horizon
            pass
        for k, obs in enumerate(instance.dynamic_obstacles):
            t = collide(traj, obs.trajectory, obs.tube_apothem, t_max)
            if t is not None:
                add(Violation('obstacle', i, t, k))
    if not report.ok:
        logger.debug(f'Validation found {len(report.violations)} violations: {report.kinds()}')
    return report
