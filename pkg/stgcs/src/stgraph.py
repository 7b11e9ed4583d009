"""Graph of collision-free space-time convex sets.

Vertices hold space-time `HPoly` sets; an undirected edge joins two vertices whose
closed sets intersect. The graph itself never adds virtual terminals: it only reports
candidate start and goal vertices for a query.
"""

import itertools
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .constants import TOL
from .errors import ContractError, EmptySetError
from .geom import (
    HPoly, Segment, State, clip_segment, contains, extrude_time, intersect, is_empty, is_usable,
    interval_union_covers, time_interval_at,
)
from .type_utils import ArrayLike, Json, VertexId
from ..utils import logger


class SpaceTimeGraph:
    """Space-time graph of convex sets with a global horizon `t_max`."""

    def __init__(self, t_max: float, d: int, graph: Optional[nx.Graph] = None, next_id: int = 0):
        self.t_max = float(t_max)
        self.d = int(d)
        self.graph = graph if graph is not None else nx.Graph()
        self._next_id = next_id

    # -- accessors --------------------------------------------------------------------
    def __getitem__(self, vid: VertexId) -> HPoly:
        return self.graph.nodes[vid]['set']

    def __contains__(self, vid: VertexId) -> bool:
        return vid in self.graph

    def __len__(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def vertex_ids(self) -> List[VertexId]:
        return sorted(self.graph.nodes)

    @property
    def vertices(self) -> Dict[VertexId, HPoly]:
        return {vid: self[vid] for vid in self.vertex_ids}

    @property
    def edges(self) -> List[Tuple[VertexId, VertexId]]:
        return sorted(tuple(sorted(e)) for e in self.graph.edges)

    @property
    def num_vertices(self) -> int:
        return self.graph.number_of_nodes()

    @property
    def num_edges(self) -> int:
        return self.graph.number_of_edges()

    def neighbors(self, vid: VertexId) -> List[VertexId]:
        return sorted(self.graph.neighbors(vid))

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        return self.graph.has_edge(u, v)

    def copy(self) -> 'SpaceTimeGraph':
        return SpaceTimeGraph(self.t_max, self.d, self.graph.copy(), self._next_id)

    # -- mutation (single owner) ------------------------------------------------------
    def add_vertex(self, X: HPoly) -> VertexId:
        if X.dim != self.d + 1:
            raise ContractError(f'Vertex set has dimension {X.dim}, expected {self.d + 1}')
        vid = self._next_id
        self._next_id += 1
        self.graph.add_node(vid, set=X)
        return vid

    def connect_if_intersecting(self, u: VertexId, v: VertexId) -> bool:
        X, Y = self[u], self[v]
        if not X.bbox.overlaps(Y.bbox):
            return False
        if is_empty(intersect(X, Y)):
            return False
        self.graph.add_edge(u, v)
        return True

    def replace_vertex(self, removed_id: VertexId, new_sets: Iterable[HPoly]) -> List[VertexId]:
        """In-place form of `insert_decomposition`; returns the ids of the added vertices."""
        if removed_id not in self.graph:
            raise ContractError(f'Vertex {removed_id} does not exist')
        former = self.neighbors(removed_id)
        self.graph.remove_node(removed_id)
        added = []
        for X in new_sets:
            if not is_usable(X):
                logger.debug(f'Dropping an empty set from the decomposition of {removed_id}')
                continue
            added.append(self.add_vertex(X))
        for u, v in itertools.combinations(added, 2):
            self.connect_if_intersecting(u, v)
        for u in added:
            for w in former:
                self.connect_if_intersecting(u, w)
        return added

    # -- queries ----------------------------------------------------------------------
    def covers(self, x: ArrayLike, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return any(X.bbox.contains(x, tol) and contains(X, x, tol) for X in self.vertices.values())

    def clip(self, seg: Segment, min_duration: float = TOL) -> List[Tuple[VertexId, Segment]]:
        """Every vertex's clip of `seg` with positive duration, in vertex-id order."""
        seg_box_lo = np.minimum(seg.x.vec, seg.y.vec)
        seg_box_hi = np.maximum(seg.x.vec, seg.y.vec)
        out = []
        for vid in self.vertex_ids:
            X = self[vid]
            box = X.bbox
            if np.any(seg_box_lo > box.hi + TOL) or np.any(seg_box_hi < box.lo - TOL):
                continue
            piece = clip_segment(seg, X)
            if piece is not None and piece.duration > min_duration:
                out.append((vid, piece))
        return out

    def stats(self) -> Dict[str, int]:
        rows = [X.nrows for X in self.vertices.values()]
        return {
            'vertices': self.num_vertices,
            'edges': self.num_edges,
            'max_rows': max(rows) if rows else 0,
        }

    def start_vertices(self, x_start: State) -> List[VertexId]:
        return start_vertices(self, x_start)

    def goal_vertices(self, p_goal: ArrayLike) -> List[Tuple[VertexId, float]]:
        return goal_vertices(self, p_goal)

    # -- serialization ----------------------------------------------------------------
    def to_dict(self) -> Json:
        return {
            't_max': self.t_max,
            'd': self.d,
            'vertices': {str(vid): X.to_dict() for vid, X in self.vertices.items()},
            'edges': [list(e) for e in self.edges],
        }

    @classmethod
    def from_dict(cls, data) -> 'SpaceTimeGraph':
        G = cls(data['t_max'], data['d'])
        ids = sorted(int(k) for k in data['vertices'])
        for vid in ids:
            G.graph.add_node(vid, set=HPoly.from_dict(data['vertices'][str(vid)]))
        G._next_id = (ids[-1] + 1) if ids else 0
        G.graph.add_edges_from(tuple(e) for e in data['edges'])
        return G

    def __repr__(self) -> str:
        return f'SpaceTimeGraph(vertices={self.num_vertices}, edges={self.num_edges}, t_max={self.t_max})'


def build_graph(spatial_sets: Sequence[HPoly], t_max: float) -> SpaceTimeGraph:
    """Extrude each spatial set over `[0, t_max]` and connect intersecting pairs."""
    if not spatial_sets:
        raise ContractError('build_graph needs at least one spatial set')
    if not t_max > 0:
        raise ContractError(f't_max must be positive, got {t_max}')
    d = spatial_sets[0].dim
    G = SpaceTimeGraph(t_max, d)
    for i, S in enumerate(spatial_sets):
        if S.dim != d:
            raise ContractError(f'Spatial set {i} has dimension {S.dim}, expected {d}')
        if is_empty(S):
            raise EmptySetError(f'Spatial set {i} is empty')
        G.add_vertex(extrude_time(S, 0.0, t_max))
    for u, v in itertools.combinations(G.vertex_ids, 2):
        G.connect_if_intersecting(u, v)
    logger.debug(f'Built {G}')
    return G


def start_vertices(G: SpaceTimeGraph, x_start: State) -> List[VertexId]:
    """All vertices whose set contains `x_start`; empty when the start is blocked."""
    x = x_start.vec
    return [vid for vid in G.vertex_ids if G[vid].bbox.contains(x) and contains(G[vid], x)]


def goal_line_intervals(G: SpaceTimeGraph, p_goal: ArrayLike) -> Dict[VertexId, Tuple[float, float]]:
    """Per vertex, the times `t in [0, t_max]` with `(p_goal, t)` inside its set."""
    p_goal = np.asarray(p_goal, dtype=float)
    out = {}
    for vid in G.vertex_ids:
        X = G[vid]
        box = X.bbox
        if np.any(p_goal < box.lo[:-1] - TOL) or np.any(p_goal > box.hi[:-1] + TOL):
            continue
        span = time_interval_at(X, p_goal)
        if span is None:
            continue
        lo, hi = max(span[0], 0.0), min(span[1], G.t_max)
        if lo <= hi + TOL:
            out[vid] = (lo, max(lo, hi))
    return out


def goal_vertices(G: SpaceTimeGraph, p_goal: ArrayLike) -> List[Tuple[VertexId, float]]:
    """Vertices where the robot can arrive at `p_goal` and stay until `t_max`.

    A vertex qualifies when the union of every vertex's goal-line interval covers
    `[t*, t_max]`, `t*` being the earliest time the vertex touches the goal line.
    """
    intervals = goal_line_intervals(G, p_goal)
    spans = list(intervals.values())
    out = []
    for vid, (t_entry, _) in intervals.items():
        if interval_union_covers(spans, t_entry, G.t_max):
            out.append((vid, t_entry))
    return out


def insert_decomposition(G: SpaceTimeGraph, removed_id: VertexId, new_sets: Iterable[HPoly]) -> SpaceTimeGraph:
    """Copy of G with `removed_id` replaced by the nonempty `new_sets`."""
    H = G.copy()
    H.replace_vertex(removed_id, new_sets)
    return H
