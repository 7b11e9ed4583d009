"""Time-optimal single-robot planning over a space-time graph of convex sets.

Pipeline (`solve_stgcs`): find start / goal vertices, solve the flow relaxation,
round fractional flows into candidate paths, solve the convex restriction of each
path and keep the fastest trajectory. `mode='exhaustive'` replaces relaxation and
rounding with enumeration of every simple path (small graphs only).
"""

import enum
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from . import constants
from .constants import EPSILON, FLOW_EPS, PARTITION_TOL, TOL
from .errors import ContractError, SolverError
from .geom import HPoly, Segment, State
from .lp import HIGHS_DEFAULT_OPTIONS, SparseLP
from .stgraph import SpaceTimeGraph, goal_vertices, start_vertices
from .type_utils import Arc, ArrayLike, FloatArray, Json, VertexId
from ..utils import logger, Timer

SOURCE: VertexId = -1
SINK: VertexId = -2

GraphPath = Tuple[VertexId, ...]


@dataclass(frozen=True)
class VelocityBounds:
    """Per-dimension velocity limits, `v_min < 0 < v_max` componentwise."""
    v_min: Tuple[float, ...]
    v_max: Tuple[float, ...]

    def __post_init__(self):
        v_min = tuple(float(v) for v in np.ravel(self.v_min))
        v_max = tuple(float(v) for v in np.ravel(self.v_max))
        object.__setattr__(self, 'v_min', v_min)
        object.__setattr__(self, 'v_max', v_max)
        if len(v_min) != len(v_max):
            raise ContractError('v_min and v_max must have the same dimension')
        if not all(lo < 0 < hi for lo, hi in zip(v_min, v_max)):
            raise ContractError(f'Velocity bounds must satisfy v_min < 0 < v_max, got {v_min}, {v_max}')

    @classmethod
    def symmetric(cls, v_max: float, d: int = 2) -> 'VelocityBounds':
        return cls((-v_max,) * d, (v_max,) * d)

    @property
    def d(self) -> int:
        return len(self.v_max)

    def admits(self, seg: Segment, tol: float = TOL) -> bool:
        dt = seg.duration
        dp = seg.y.pos - seg.x.pos
        return bool(np.all(dp <= np.asarray(self.v_max) * dt + tol) and np.all(dp >= np.asarray(self.v_min) * dt - tol))

    def min_travel_time(self, p_from: ArrayLike, p_to: ArrayLike) -> float:
        """Free-space lower bound `max_k |dp_k| / v_k` with the bound facing the motion."""
        dp = np.asarray(p_to, dtype=float) - np.asarray(p_from, dtype=float)
        rates = np.where(dp >= 0, np.asarray(self.v_max), -np.asarray(self.v_min))
        return float(np.max(np.abs(dp) / rates)) if dp.size else 0.0

    def to_dict(self) -> Json:
        return {'v_min': list(self.v_min), 'v_max': list(self.v_max)}


class Trajectory:
    """Piecewise-linear space-time curve through `states` (time stamps increasing)."""

    def __init__(self, states: Sequence[State]):
        if not states:
            raise ContractError('A trajectory needs at least one state')
        self.states: List[State] = list(states)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __eq__(self, other) -> bool:
        return isinstance(other, Trajectory) and self.states == other.states

    def __repr__(self) -> str:
        return f'Trajectory({len(self.states)} states, t=[{self.start.t:.3f}, {self.end.t:.3f}])'

    @property
    def start(self) -> State:
        return self.states[0]

    @property
    def end(self) -> State:
        return self.states[-1]

    @property
    def arrival_time(self) -> float:
        return self.end.t

    @property
    def d(self) -> int:
        return self.start.d

    @property
    def times(self) -> FloatArray:
        return np.array([s.t for s in self.states])

    @property
    def positions(self) -> FloatArray:
        return np.array([s.p for s in self.states])

    def segments(self) -> List[Segment]:
        return [Segment(a, b) for a, b in zip(self.states[:-1], self.states[1:])]

    def position_at(self, t: float) -> FloatArray:
        """Position at time t; before the start / after the end the robot stays put."""
        return self.sample(np.array([t]))[0]

    def sample(self, ts: ArrayLike) -> FloatArray:
        ts = np.asarray(ts, dtype=float)
        times, pos = self.times, self.positions
        return np.stack([np.interp(ts, times, pos[:, k]) for k in range(pos.shape[1])], axis=-1)

    def shifted(self, dt: float) -> 'Trajectory':
        return Trajectory([State(s.p, s.t + dt) for s in self.states])

    def key(self, digits: int = 9) -> Tuple:
        return tuple((tuple(round(v, digits) for v in s.p), round(s.t, digits)) for s in self.states)

    def to_dict(self) -> Json:
        return {'states': [s.to_dict() for s in self.states]}

    @classmethod
    def from_dict(cls, data) -> 'Trajectory':
        return cls([State.from_dict(s) for s in data['states']])


@dataclass
class FlowSolution:
    """Fractional arc flows of the relaxation and its optimum (a cost lower bound)."""
    flow: Dict[Arc, float]
    lower_bound: float
    sources: List[VertexId] = field(default_factory=list)
    sinks: List[VertexId] = field(default_factory=list)

    def out_arcs(self, min_flow: float = FLOW_EPS) -> Dict[VertexId, List[Tuple[VertexId, float]]]:
        out: Dict[VertexId, List[Tuple[VertexId, float]]] = {}
        for (u, v), phi in sorted(self.flow.items()):
            if phi >= min_flow:
                out.setdefault(u, []).append((v, phi))
        return out


class Mode(str, enum.Enum):
    HEURISTIC = 'heuristic'
    EXHAUSTIVE = 'exhaustive'


class FailureReason(str, enum.Enum):
    NO_START_VERTEX = 'no_start_vertex'
    NO_GOAL_VERTEX = 'no_goal_vertex'
    NO_GRAPH_PATH = 'no_graph_path'
    NO_FEASIBLE_RESTRICTION = 'no_feasible_restriction'
    PATH_CAP_EXCEEDED = 'path_cap_exceeded'
    SOLVER_FAILURE = 'solver_failure'


@dataclass
class SolveParams:
    epsilon: float = EPSILON
    path_budget: Optional[int] = None
    rng_seed: int = 0
    mode: str = Mode.HEURISTIC.value
    restriction_retries: int = 0
    log_base: Optional[float] = None
    max_exhaustive_paths: int = constants.MAX_EXHAUSTIVE_PATHS

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ContractError(f'epsilon must be positive, got {self.epsilon}')
        if self.path_budget is not None and self.path_budget < 1:
            raise ContractError(f'path_budget must be >= 1, got {self.path_budget}')
        self.mode = Mode(self.mode).value

    def budget_for(self, G: SpaceTimeGraph) -> int:
        if self.path_budget is not None:
            return self.path_budget
        return constants.default_path_budget(G.num_edges, log_base=self.log_base)

    def to_dict(self) -> Json:
        return {
            'epsilon': self.epsilon, 'path_budget': self.path_budget, 'rng_seed': self.rng_seed,
            'mode': self.mode, 'restriction_retries': self.restriction_retries,
        }


@dataclass
class SolveResult:
    trajectory: Optional[Trajectory] = None
    cost: Optional[float] = None
    lower_bound: Optional[float] = None
    path: Optional[GraphPath] = None
    paths_tried: int = 0
    feasible_paths: int = 0
    mode: str = Mode.HEURISTIC.value
    seed: int = 0
    solver_failures: int = 0
    reason: Optional[FailureReason] = None
    runtime_s: float = 0.0

    @property
    def success(self) -> bool:
        return self.trajectory is not None

    def to_report(self) -> Json:
        return {
            'cost': self.cost,
            'lower_bound': self.lower_bound,
            'paths_tried': self.paths_tried,
            'feasible_paths': self.feasible_paths,
            'solver_failures': self.solver_failures,
            'mode': self.mode,
            'seed': self.seed,
            'reason': self.reason.value if self.reason else None,
        }


def restriction(G: SpaceTimeGraph, path: Sequence[VertexId], x_start: State, p_goal: ArrayLike,
                vb: VelocityBounds, eps: float = EPSILON) -> Optional[Tuple[Trajectory, float]]:
    """Fastest piecewise-linear trajectory through the sets of a fixed graph path.

    One segment per visited set, `y_u = x_v` between consecutive sets, at least `eps`
    seconds per set, per-dimension velocity bounds, fixed start state and goal position.
    Returns `(trajectory, arrival - x_start.t)` or None when the path admits no trajectory.
    """
    if not path:
        raise ContractError('restriction needs a nonempty path')
    d = G.d
    n = d + 1
    k = len(path)
    lp = SparseLP()
    X = lp.add_variables(k * n).reshape(k, n)
    Y = lp.add_variables(k * n).reshape(k, n)
    v_min = np.asarray(vb.v_min)
    v_max = np.asarray(vb.v_max)
    vel_block = _velocity_block(v_min, v_max)
    for i, vid in enumerate(path):
        Xv = G[vid]
        lp.add_inequalities(X[i], Xv.A, Xv.b)
        lp.add_inequalities(Y[i], Xv.A, Xv.b)
        lp.add_inequalities([X[i, d], Y[i, d]], [[1.0, -1.0]], [-eps])
        lp.add_inequalities(np.concatenate([X[i], Y[i]]), vel_block, np.zeros(2 * d))
        lp.set_cost([Y[i, d], X[i, d]], [1.0, -1.0])
        if i + 1 < k:
            lp.add_equalities(np.concatenate([Y[i], X[i + 1]]), np.hstack([np.eye(n), -np.eye(n)]), np.zeros(n))
    lp.add_equalities(X[0], np.eye(n), x_start.vec)
    lp.add_equalities(Y[-1, :d], np.eye(d), np.asarray(p_goal, dtype=float))
    sol = lp.solve()
    if not sol.optimal:
        return None
    states = [State.from_vec(sol.x[X[0]])] + [State.from_vec(sol.x[Y[i]]) for i in range(k)]
    traj = Trajectory(states)
    return traj, traj.arrival_time - x_start.t


def _velocity_block(v_min: np.ndarray, v_max: np.ndarray) -> np.ndarray:
    """Rows over `[x (d+1), y (d+1)]` encoding `v_min dt <= y.p - x.p <= v_max dt`."""
    d = v_min.shape[0]
    n = d + 1
    block = np.zeros((2 * d, 2 * n))
    for j in range(d):
        # (y_j - x_j) - v_max_j (y_t - x_t) <= 0
        block[j, n + j], block[j, j] = 1.0, -1.0
        block[j, n + d], block[j, d] = -v_max[j], v_max[j]
        # -(y_j - x_j) + v_min_j (y_t - x_t) <= 0
        block[d + j, n + j], block[d + j, j] = -1.0, 1.0
        block[d + j, n + d], block[d + j, d] = v_min[j], -v_min[j]
    return block


def _add_perspective(lp: SparseLP, W: np.ndarray, phi: int, X: HPoly, vel_block: np.ndarray, eps: float):
    """`W = phi * (x, y)` with `(x, y)` a feasible in-set segment; homogeneous in phi."""
    n = X.dim
    d = n - 1
    rows_x = np.hstack([X.A, -X.b[:, None]])
    lp.add_inequalities(np.append(W[:n], phi), rows_x, np.zeros(X.nrows))
    lp.add_inequalities(np.append(W[n:], phi), rows_x, np.zeros(X.nrows))
    lp.add_inequalities([W[d], W[n + d], phi], [[1.0, -1.0, eps]], [0.0])
    lp.add_inequalities(W, vel_block, np.zeros(vel_block.shape[0]))


def relaxation(G: SpaceTimeGraph, sources: Sequence[VertexId], sinks: Sequence[Tuple[VertexId, float]],
               x_start: State, p_goal: ArrayLike, vb: VelocityBounds, eps: float = EPSILON) -> Optional[FlowSolution]:
    """Perspective flow relaxation of the time-optimal shortest path; None if infeasible.

    Arcs: source -> each start vertex, both directions of every edge, each goal vertex -> sink.
    Every arc carries a flow `phi` and the flow-scaled segment of its tail and/or head set.
    Only vertices the robot can enter in time and leave early enough to reach the goal by
    `t_max` take part; of those, only components holding both a source and a sink.
    """
    if not sources or not sinks:
        raise ContractError('relaxation needs at least one source and one sink vertex')
    d = G.d
    n = d + 1
    sink_ids = [g for g, _ in sinks]
    p_goal = np.asarray(p_goal, dtype=float)
    timely = time_reachable(G, G.vertex_ids, x_start, p_goal, vb)
    keep = _reachable(G, sources, sink_ids, within=timely)
    if not keep:
        return None
    logger.debug(f'Relaxation over {len(keep)} of {G.num_vertices} vertices')
    arcs: List[Arc] = [(SOURCE, s) for s in sources if s in keep]
    for u, v in G.edges:
        if u in keep and v in keep:
            arcs += [(u, v), (v, u)]
    arcs += [(g, SINK) for g in sink_ids if g in keep]

    lp = SparseLP()
    vel_block = _velocity_block(np.asarray(vb.v_min), np.asarray(vb.v_max))
    phi: Dict[Arc, int] = {}
    tail_copy: Dict[Arc, np.ndarray] = {}
    head_copy: Dict[Arc, np.ndarray] = {}
    for e in arcs:
        u, v = e
        phi[e] = int(lp.add_variables(1, lower=0.0, upper=1.0)[0])
        if u >= 0:
            W = lp.add_variables(2 * n)
            _add_perspective(lp, W, phi[e], G[u], vel_block, eps)
            lp.set_cost([W[n + d], W[d]], [1.0, -1.0])
            tail_copy[e] = W
        if v >= 0:
            W = lp.add_variables(2 * n)
            _add_perspective(lp, W, phi[e], G[v], vel_block, eps)
            head_copy[e] = W
        if u >= 0 and v >= 0:
            # y of the tail copy equals x of the head copy
            lp.add_equalities(np.concatenate([tail_copy[e][n:], head_copy[e][:n]]),
                              np.hstack([np.eye(n), -np.eye(n)]), np.zeros(n))
        elif u == SOURCE:
            lp.add_equalities(np.append(head_copy[e][:n], phi[e]),
                              np.hstack([np.eye(n), -x_start.vec[:, None]]), np.zeros(n))
        else:
            lp.add_equalities(np.append(tail_copy[e][n:n + d], phi[e]),
                              np.hstack([np.eye(d), -np.asarray(p_goal, dtype=float)[:, None]]), np.zeros(d))

    out_of: Dict[VertexId, List[Arc]] = {}
    into: Dict[VertexId, List[Arc]] = {}
    for e in arcs:
        out_of.setdefault(e[0], []).append(e)
        into.setdefault(e[1], []).append(e)
    lp.add_equalities([phi[e] for e in out_of.get(SOURCE, [])], [[1.0] * len(out_of.get(SOURCE, []))], [1.0])
    lp.add_equalities([phi[e] for e in into.get(SINK, [])], [[1.0] * len(into.get(SINK, []))], [1.0])
    for vid in sorted(keep):
        ins, outs = into.get(vid, []), out_of.get(vid, [])
        if not ins and not outs:
            continue
        cols = [phi[e] for e in ins] + [phi[e] for e in outs]
        lp.add_equalities(cols, [[1.0] * len(ins) + [-1.0] * len(outs)], [0.0])
        if ins:
            lp.add_inequalities([phi[e] for e in ins], [[1.0] * len(ins)], [1.0])
        # flow-weighted segment conservation
        cols = np.array([head_copy[e] for e in ins] + [tail_copy[e] for e in outs]).T
        coeff = [1.0] * len(ins) + [-1.0] * len(outs)
        lp.add_equalities(cols, np.tile(coeff, (2 * n, 1)), np.zeros(2 * n))

    # 2-cycle cuts: phi(u, v) + phi(v, u) <= inflow(w) for w in {u, v}
    for u, v in G.edges:
        if u not in keep or v not in keep:
            continue
        pair = [phi[(u, v)], phi[(v, u)]]
        for w in (u, v):
            ins = [phi[e] for e in into.get(w, [])]
            lp.add_inequalities(pair + ins, [[1.0, 1.0] + [-1.0] * len(ins)], [0.0])

    sol = lp.solve(options=HIGHS_DEFAULT_OPTIONS)
    if not sol.optimal:
        logger.debug(f'Relaxation infeasible over {len(arcs)} arcs')
        return None
    flow = {e: float(min(1.0, max(0.0, sol.x[phi[e]]))) for e in arcs}
    return FlowSolution(flow=flow, lower_bound=float(sol.fun), sources=list(sources), sinks=sink_ids)


def time_reachable(G: SpaceTimeGraph, vids: Iterable[VertexId], x_start: State, p_goal: ArrayLike,
                   vb: VelocityBounds) -> set:
    """Vertices some velocity-bounded trajectory from `x_start` to `p_goal` (by t_max) can visit.

    Bounding-box test: the robot reaches the box no earlier than its free-space travel
    time, is in the set no earlier than the set's first time, and still has to reach the goal.
    """
    d = G.d
    p_goal = np.asarray(p_goal, dtype=float)
    out = set()
    for vid in vids:
        box = G[vid].bbox
        lo, hi = box.lo[:d], box.hi[:d]
        enter = x_start.t + vb.min_travel_time(x_start.pos, np.clip(x_start.pos, lo, hi))
        if enter > box.hi[d] + PARTITION_TOL:
            continue
        arrive = max(enter, box.lo[d]) + vb.min_travel_time(np.clip(p_goal, lo, hi), p_goal)
        if arrive <= G.t_max + PARTITION_TOL:
            out.add(vid)
    return out


def _reachable(G: SpaceTimeGraph, sources: Iterable[VertexId], sinks: Iterable[VertexId],
               within: Optional[set] = None) -> set:
    """Vertices (of `within`, default all) in a component holding both a source and a sink."""
    H = G.graph if within is None else G.graph.subgraph(within)
    keep = set()
    sources, sinks = set(sources), set(sinks)
    for comp in nx.connected_components(H):
        if comp & sources and comp & sinks:
            keep |= comp
    return keep


def _greedy_path(out: Dict[VertexId, List[Tuple[VertexId, float]]], max_steps: int) -> Optional[GraphPath]:
    path, visited, cur = [], set(), SOURCE
    for _ in range(max_steps):
        options = [(v, f) for v, f in out.get(cur, []) if v not in visited]
        if not options:
            return None
        v, _ = min(options, key=lambda o: (-o[1], o[0]))
        if v == SINK:
            return tuple(path)
        path.append(v)
        visited.add(v)
        cur = v
    return None


def _random_walk(out: Dict[VertexId, List[Tuple[VertexId, float]]], rng: np.random.Generator, max_steps: int) -> Optional[GraphPath]:
    path: List[VertexId] = []
    cur = SOURCE
    for _ in range(max_steps):
        options = out.get(cur)
        if not options:
            return None
        weights = np.array([f for _, f in options])
        v = options[int(rng.choice(len(options), p=weights / weights.sum()))][0]
        if v == SINK:
            return tuple(path)
        if v in path:
            # loop erasure: drop the cycle and continue from its first visit
            path = path[:path.index(v) + 1]
        else:
            path.append(v)
        cur = v
    return None


def round_paths(G: SpaceTimeGraph, flows: FlowSolution, budget: int, rng_seed: int = 0) -> List[GraphPath]:
    """Sample up to `budget` distinct simple paths, flows read as transition probabilities.

    The deterministic max-flow greedy path comes first; the random walks start from the
    virtual source and erase loops as they go.
    """
    out = flows.out_arcs()
    max_steps = 50 * (G.num_vertices + 2)
    paths: List[GraphPath] = []
    seen = set()
    greedy = _greedy_path(out, max_steps)
    if greedy is not None:
        paths.append(greedy)
        seen.add(greedy)
    rng = np.random.default_rng(rng_seed)
    attempts = 0
    max_attempts = 2 * budget + 8
    while len(paths) < budget and attempts < max_attempts:
        attempts += 1
        walk = _random_walk(out, rng, max_steps)
        if walk is not None and walk not in seen:
            seen.add(walk)
            paths.append(walk)
    return paths[:budget]


def enumerate_paths(G: SpaceTimeGraph, sources: Sequence[VertexId], sinks: Sequence[VertexId], cap: int) -> Tuple[List[GraphPath], bool]:
    """All simple source-to-sink vertex paths (depth first), and whether `cap` cut it short."""
    H = nx.Graph()
    H.add_nodes_from(G.graph.nodes)
    H.add_edges_from(G.graph.edges)
    H.add_edges_from((SOURCE, s) for s in sources)
    H.add_edges_from((g, SINK) for g in sinks)
    paths = []
    for p in nx.all_simple_paths(H, SOURCE, SINK):
        if len(paths) >= cap:
            return paths, True
        paths.append(tuple(p[1:-1]))
    return paths, False


def _best_restriction(G, candidates, x_start, p_goal, vb, eps, result: SolveResult):
    best = None
    for path in candidates:
        result.paths_tried += 1
        try:
            res = restriction(G, path, x_start, p_goal, vb, eps)
        except SolverError as e:
            result.solver_failures += 1
            logger.warning(f'Restriction of path {path} failed: {e}')
            continue
        if res is None:
            logger.debug(f'Path {path} admits no trajectory')
            continue
        result.feasible_paths += 1
        if best is None or res[1] < best[1] - 1e-12:
            best = (res[0], res[1], tuple(path))
    return best


def solve_stgcs(G: SpaceTimeGraph, x_start: State, p_goal: ArrayLike, vb: VelocityBounds,
                params: Optional[SolveParams] = None) -> SolveResult:
    """Plan the fastest trajectory from `x_start` to `p_goal` that can then stay there until t_max.

    Never raises on solver trouble: an LP that fails under every HiGHS setting ends the
    query with `FailureReason.SOLVER_FAILURE`.
    """
    params = params or SolveParams()
    timer = Timer()
    result = SolveResult(mode=params.mode, seed=params.rng_seed)
    try:
        _solve_into(result, G, x_start, np.asarray(p_goal, dtype=float), vb, params)
    except SolverError as e:
        logger.warning(f'solve_stgcs aborted: {e}')
        result.solver_failures += 1
        result.trajectory = result.cost = result.path = None
        result.reason = FailureReason.SOLVER_FAILURE
    result.runtime_s = timer.elapsed
    logger.debug(f'solve_stgcs[{params.mode}] cost={result.cost} lb={result.lower_bound} '
                 f'paths={result.paths_tried}/{result.feasible_paths} in {result.runtime_s:.3f}s')
    return result


def _solve_into(result: SolveResult, G: SpaceTimeGraph, x_start: State, p_goal: np.ndarray,
                vb: VelocityBounds, params: SolveParams) -> None:
    sources = start_vertices(G, x_start)
    if not sources:
        result.reason = FailureReason.NO_START_VERTEX
        return
    sinks = goal_vertices(G, p_goal)
    if not sinks:
        result.reason = FailureReason.NO_GOAL_VERTEX
        return

    best = None
    if params.mode == Mode.EXHAUSTIVE.value:
        candidates, truncated = enumerate_paths(G, sources, [g for g, _ in sinks], params.max_exhaustive_paths)
        if truncated:
            logger.warning(f'Exhaustive enumeration stopped at {params.max_exhaustive_paths} paths')
        best = _best_restriction(G, candidates, x_start, p_goal, vb, params.epsilon, result)
        if best is None and truncated:
            result.reason = FailureReason.PATH_CAP_EXCEEDED
        if best is not None:
            result.lower_bound = best[1]
    else:
        flows = relaxation(G, sources, sinks, x_start, p_goal, vb, params.epsilon)
        if flows is None:
            result.reason = FailureReason.NO_GRAPH_PATH
            return
        result.lower_bound = flows.lower_bound
        budget = params.budget_for(G)
        tried = set()
        for round_idx in range(params.restriction_retries + 1):
            paths = [p for p in round_paths(G, flows, budget, params.rng_seed + round_idx) if p not in tried]
            tried.update(paths)
            found = _best_restriction(G, paths, x_start, p_goal, vb, params.epsilon, result)
            if found is not None and (best is None or found[1] < best[1] - 1e-12):
                best = found

    if best is None:
        if result.reason is None and result.solver_failures:
            result.reason = FailureReason.SOLVER_FAILURE
        result.reason = result.reason or FailureReason.NO_FEASIBLE_RESTRICTION
    else:
        result.trajectory, result.cost, result.path = best
