"""Exact convex decomposition: carve a reserved trajectory's swept tube out of the graph.

Each linear piece of the (canonicalized) trajectory sweeps a sheared square tube.
Every vertex set whose interior the tube reaches is cut into time slabs and the
slab holding the piece is sliced by the tube's side faces, so the children cover
the set minus the open tube and never overlap its interior.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .constants import PARTITION_TOL, TOL
from .errors import ContractError, CoverageError
from .gcsprog import Trajectory
from .geom import (
    HPoly, Segment, State, Tube, first_gap, intersects_interior, is_empty,
    reduce, segment_tube, side_faces,
)
from .stgraph import SpaceTimeGraph
from .type_utils import Json, VertexId
from ..utils import logger


@dataclass(frozen=True)
class VertexSegment:
    vertex_id: VertexId
    seg: Segment
    # index among the positive-duration pieces of the trajectory
    piece: int = -1


@dataclass(frozen=True)
class Reservation:
    """A trajectory to keep clear, swept by a square of apothem `tube_apothem`."""
    trajectory: Trajectory
    tube_apothem: float

    def __post_init__(self):
        if not self.tube_apothem > 0:
            raise ContractError(f'Tube apothem must be positive, got {self.tube_apothem}')

    def to_dict(self) -> Json:
        return {'trajectory': self.trajectory.to_dict(), 'apothem': self.tube_apothem}

    @classmethod
    def from_dict(cls, data) -> 'Reservation':
        return cls(Trajectory.from_dict(data['trajectory']), float(data['apothem']))


def canonicalize(traj: Trajectory, t_max: float) -> Trajectory:
    """Make the start / goal waits explicit over `[0, t_max]` and drop repeated states."""
    first, last = traj.start, traj.end
    if first.t < -TOL or last.t > t_max + TOL:
        raise ContractError(f'Trajectory spans [{first.t}, {last.t}], outside [0, {t_max}]')
    states = list(traj.states)
    if first.t > TOL:
        states.insert(0, State(first.p, 0.0))
    if last.t < t_max - TOL:
        states.append(State(last.p, t_max))
    out = [states[0]]
    for s in states[1:]:
        if not s.close_to(out[-1]):
            out.append(s)
    if len(out) == 1:
        # single state at the horizon boundary
        s = out[0]
        out = [State(s.p, 0.0), State(s.p, t_max)]
    return Trajectory(out)


def vertex_segment_sequence(G: SpaceTimeGraph, traj: Trajectory, strict: bool = True) -> List[VertexSegment]:
    """Clip every linear piece of `traj` against every vertex set.

    Raises CoverageError (strict) when some time interval is covered by no set;
    otherwise the gap is only logged.
    """
    out: List[VertexSegment] = []
    pieces_of = (seg for seg in traj.segments() if seg.duration > 0)
    for k, seg in enumerate(pieces_of):
        pieces = G.clip(seg)
        out.extend(VertexSegment(vid, sub, k) for vid, sub in pieces)
        gap = first_gap([(sub.x.t, sub.y.t) for _, sub in pieces], seg.x.t, seg.y.t, tol=PARTITION_TOL)
        if gap is not None:
            msg = f'Trajectory leaves the free space during t in [{gap[0]:.6g}, {gap[1]:.6g}]'
            if strict:
                raise CoverageError(msg, gap=gap)
            logger.debug(msg)
    return out


def _time_rows(dim: int, lo: Optional[float], hi: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
    rows, rhs = [], []
    if lo is not None:
        row = np.zeros(dim)
        row[-1] = -1.0
        rows.append(row)
        rhs.append(-lo)
    if hi is not None:
        row = np.zeros(dim)
        row[-1] = 1.0
        rows.append(row)
        rhs.append(hi)
    return np.array(rows).reshape(-1, dim), np.array(rhs)


def _time_slab(X: HPoly, lo: Optional[float], hi: Optional[float]) -> HPoly:
    A, b = _time_rows(X.dim, lo, hi)
    return X.with_rows(A, b) if len(b) else X


def _slice_band(band: HPoly, tube: Tube) -> List[HPoly]:
    """Peel `band` outside each side face in turn; what is left lies inside the tube."""
    out = []
    remaining = band
    for face, outside in side_faces(tube):
        piece = remaining.with_halfspace(outside)
        if not is_empty(piece):
            out.append(piece)
        remaining = remaining.with_halfspace(face)
        if is_empty(remaining):
            break
    return out


def decompose_tubes(X: HPoly, tubes: Sequence[Tube]) -> List[HPoly]:
    """Partition X minus the open tubes into convex children.

    `tubes` are pieces of one trajectory, so their time spans only meet at shared
    planes. Slabs of X outside every tube span stay whole; zero-duration slabs vanish.
    """
    t_lo, t_hi = X.time_extent()
    ordered = sorted(tubes, key=lambda L: L.segment.x.t)
    children: List[HPoly] = []
    cursor = t_lo
    for L in ordered:
        s0, s1 = L.segment.x.t, L.segment.y.t
        if s0 > cursor + PARTITION_TOL:
            children.append(_time_slab(X, cursor if cursor > t_lo else None, s0))
        lo, hi = max(s0, t_lo), min(s1, t_hi)
        if hi > lo:
            children.extend(_slice_band(_time_slab(X, lo, hi), L))
        cursor = max(cursor, s1)
    if t_hi > cursor + PARTITION_TOL:
        children.append(_time_slab(X, cursor, None))
    return [reduce(C, use_lp=True) for C in children if not is_empty(C)]


def decompose_one(X: HPoly, seg: Segment, r: float) -> List[HPoly]:
    """Children of X around the tube of apothem r swept along `seg`.

    Up to 2 + 2d sets: the part before `seg.x.t`, the part after `seg.y.t` and the
    pieces of the middle band outside each side face of the tube.
    """
    if not seg.duration > 0:
        raise ContractError(f'Cannot decompose around a degenerate segment: {seg}')
    return decompose_tubes(X, [segment_tube(seg, r)])


def _trajectory_tubes(traj: Trajectory, r: float) -> List[Tube]:
    return [segment_tube(seg, r) for seg in traj.segments() if seg.duration > 0]


def reserve(G: SpaceTimeGraph, res: Reservation, strict: bool = False, inplace: bool = False) -> SpaceTimeGraph:
    """Graph in which no vertex set meets the open tube swept by `res`.

    Works on a copy unless `inplace`. Reserving the same trajectory twice changes nothing.
    """
    H = G if inplace else G.copy()
    traj = canonicalize(res.trajectory, H.t_max)
    sequence = vertex_segment_sequence(H, traj, strict=strict)
    tubes = _trajectory_tubes(traj, res.tube_apothem)
    # a set holding a positive-duration piece of the centerline meets that tube's interior
    hit_pairs = {(vs.vertex_id, vs.piece) for vs in sequence}
    affected: Dict[VertexId, List[Tube]] = {}
    for vid in H.vertex_ids:
        X = H[vid]
        for k, L in enumerate(tubes):
            if (vid, k) in hit_pairs or (
                    X.bbox.overlaps(L.bbox, tol=-PARTITION_TOL) and intersects_interior(X, L)):
                affected.setdefault(vid, []).append(L)
    added = 0
    for vid, hits in affected.items():
        children = decompose_tubes(H[vid], hits)
        added += len(H.replace_vertex(vid, children))
    logger.debug(f'Reserved trajectory with {len(tubes)} pieces ({len(hit_pairs)} pairs from the clipped sequence): '
                 f'replaced {len(affected)} sets by {added}, now {H}')
    return H


def reserve_all(G: SpaceTimeGraph, reservations: Iterable[Reservation], strict: bool = False) -> SpaceTimeGraph:
    H = G.copy()
    for res in reservations:
        reserve(H, res, strict=strict, inplace=True)
    return H
