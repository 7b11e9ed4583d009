"""H-representation polyhedra for space and space-time regions.

A set is `{x | A x <= b}`. Space-time sets carry time as their last coordinate.
Rows are rescaled to unit infinity-norm on construction so the containment
tolerance means the same thing for every row. All comparisons are inclusive.
"""

import functools
from dataclasses import dataclass
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .constants import TOL
from .errors import ContractError, EmptySetError, UnboundedError
from .lp import solve_lp
from .type_utils import ArrayLike, FloatArray, Json


@dataclass(frozen=True)
class State:
    """Space-time state: position `p` (meters) and time `t` (seconds)."""
    p: Tuple[float, ...]
    t: float

    def __post_init__(self):
        object.__setattr__(self, 'p', tuple(float(v) for v in np.ravel(self.p)))
        object.__setattr__(self, 't', float(self.t))

    @property
    def d(self) -> int:
        return len(self.p)

    @property
    def vec(self) -> FloatArray:
        return np.array(self.p + (self.t,), dtype=float)

    @property
    def pos(self) -> FloatArray:
        return np.array(self.p, dtype=float)

    @classmethod
    def from_vec(cls, v: ArrayLike) -> 'State':
        v = np.asarray(v, dtype=float)
        return cls(tuple(v[:-1]), v[-1])

    def close_to(self, other: 'State', tol: float = TOL) -> bool:
        return abs(self.t - other.t) <= tol and bool(np.all(np.abs(self.pos - other.pos) <= tol))

    def to_dict(self) -> Json:
        return {'p': list(self.p), 't': self.t}

    @classmethod
    def from_dict(cls, data) -> 'State':
        return cls(tuple(data['p']), data['t'])


@dataclass(frozen=True)
class Segment:
    """Straight space-time segment from `x` to `y`."""
    x: State
    y: State

    @property
    def duration(self) -> float:
        return self.y.t - self.x.t

    @property
    def velocity(self) -> FloatArray:
        if self.duration <= 0:
            raise ContractError(f'Segment has no positive duration: {self}')
        return (self.y.pos - self.x.pos) / self.duration

    def at(self, s: float) -> State:
        return State.from_vec(self.x.vec + s * (self.y.vec - self.x.vec))

    def position_at(self, t: float) -> FloatArray:
        if self.duration <= 0:
            return self.x.pos
        s = (t - self.x.t) / self.duration
        return self.x.pos + s * (self.y.pos - self.x.pos)


class Halfspace(NamedTuple):
    """`{x | a.x <= b}`."""
    a: FloatArray
    b: float

    def complement(self) -> 'Halfspace':
        """Closed complement `{x | a.x >= b}`; it shares the boundary plane."""
        return Halfspace(-self.a, -self.b)

    def as_hpoly(self) -> 'HPoly':
        return HPoly(self.a[None, :], [self.b])

    def contains(self, x: ArrayLike, tol: float = TOL) -> bool:
        return float(self.a @ np.asarray(x, dtype=float)) <= self.b + tol


class SideFace(NamedTuple):
    face: Halfspace
    outside: Halfspace


@dataclass(frozen=True)
class Box:
    """Axis-aligned box `lo <= x <= hi`."""
    lo: FloatArray
    hi: FloatArray

    def overlaps(self, other: 'Box', tol: float = TOL) -> bool:
        return bool(np.all(self.lo <= other.hi + tol) and np.all(other.lo <= self.hi + tol))

    def contains(self, x: ArrayLike, tol: float = TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    @classmethod
    def from_points(cls, points: Sequence[ArrayLike], pad: float = 0.0) -> 'Box':
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(pts.min(axis=0) - pad, pts.max(axis=0) + pad)


def _normalize_rows(A: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    scale = np.max(np.abs(A), axis=1) if A.size else np.zeros(A.shape[0])
    scale = np.where(scale > 0, scale, 1.0)
    return A / scale[:, None], b / scale


class HPoly:
    """Convex polyhedron `{x | A x <= b}` (immutable)."""

    def __init__(self, A: ArrayLike, b: ArrayLike, normalize: bool = True):
        A = np.array(A, dtype=float)
        b = np.array(b, dtype=float).ravel()
        if A.ndim != 2:
            if A.size == 0:
                A = A.reshape(0, b.shape[0] if b.size else 0)
            else:
                A = np.atleast_2d(A)
        if A.shape[0] != b.shape[0]:
            raise ContractError(f'A has {A.shape[0]} rows but b has {b.shape[0]} entries')
        if not np.all(np.isfinite(A)):
            raise ContractError('HPoly rows must have finite entries')
        if normalize and A.shape[0]:
            A, b = _normalize_rows(A, b)
        A.setflags(write=False)
        b.setflags(write=False)
        self._A = A
        self._b = b

    @property
    def A(self) -> np.ndarray:
        return self._A

    @property
    def b(self) -> np.ndarray:
        return self._b

    @property
    def dim(self) -> int:
        return self._A.shape[1]

    @property
    def nrows(self) -> int:
        return self._A.shape[0]

    @classmethod
    def from_box(cls, lo: ArrayLike, hi: ArrayLike) -> 'HPoly':
        lo = np.asarray(lo, dtype=float)
        hi = np.asarray(hi, dtype=float)
        n = lo.shape[0]
        eye = np.eye(n)
        return cls(np.vstack([eye, -eye]), np.concatenate([hi, -lo]))

    def with_rows(self, A: ArrayLike, b: ArrayLike) -> 'HPoly':
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.shape[1] != self.dim:
            raise ContractError(f'Row dimension {A.shape[1]} does not match set dimension {self.dim}')
        return HPoly(np.vstack([self._A, A]), np.concatenate([self._b, np.atleast_1d(b)]), normalize=True)

    def with_halfspace(self, h: Halfspace) -> 'HPoly':
        return self.with_rows(h.a[None, :], [h.b])

    def contains(self, x: ArrayLike, tol: float = TOL) -> bool:
        return contains(self, x, tol)

    def is_empty(self) -> bool:
        return is_empty(self)

    @functools.cached_property
    def chebyshev(self) -> Tuple[float, Optional[FloatArray]]:
        return chebyshev_ball(self)

    @functools.cached_property
    def bbox(self) -> Box:
        return bounding_box(self)

    def time_extent(self) -> Tuple[float, float]:
        """Min and max of the last (time) coordinate."""
        box = self.bbox
        return float(box.lo[-1]), float(box.hi[-1])

    def to_dict(self) -> Json:
        return {'A': self._A.tolist(), 'b': self._b.tolist()}

    @classmethod
    def from_dict(cls, data) -> 'HPoly':
        A = np.asarray(data['A'], dtype=float)
        b = np.asarray(data['b'], dtype=float)
        return cls(A.reshape(len(b), -1) if A.size else A, b)

    def __repr__(self) -> str:
        return f'HPoly(dim={self.dim}, rows={self.nrows})'


class Tube(HPoly):
    """Sheared prism swept by a square of apothem `r` moving along a segment.

    Row layout: the two time faces first, then the side faces in the order
    (+p0, -p0, +p1, -p1, ...).
    """

    def __init__(self, A, b, segment: Segment, apothem: float):
        super().__init__(A, b, normalize=True)
        self.segment = segment
        self.apothem = float(apothem)

    @functools.cached_property
    def bbox(self) -> Box:
        x, y, r = self.segment.x, self.segment.y, self.apothem
        lo = np.minimum(x.pos, y.pos) - r
        hi = np.maximum(x.pos, y.pos) + r
        return Box(np.append(lo, x.t), np.append(hi, y.t))


def _check_dim(P: HPoly, n: int, what: str = 'point'):
    if P.dim != n:
        raise ContractError(f'{what} has dimension {n} but the set has dimension {P.dim}')


def contains(P: HPoly, x: ArrayLike, tol: float = TOL) -> bool:
    x = np.asarray(x, dtype=float).ravel()
    _check_dim(P, x.shape[0])
    if P.nrows == 0:
        return True
    return bool(np.all(P.A @ x <= P.b + tol))


def chebyshev_ball(P: HPoly) -> Tuple[float, Optional[FloatArray]]:
    """Radius and center of the largest inscribed Euclidean ball.

    The radius is capped at 1 so unbounded sets keep the LP bounded; a negative radius
    measures how far the constraints are from being jointly satisfiable.
    Returns `(-inf, None)` when even the relaxed LP is infeasible.
    """
    n = P.dim
    if P.nrows == 0:
        return 1.0, np.zeros(n)
    norms = np.linalg.norm(P.A, axis=1)
    G = np.hstack([P.A, norms[:, None]])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    bounds = [(None, None)] * n + [(None, 1.0)]
    sol = solve_lp(c, A_ub=G, b_ub=P.b, bounds=bounds)
    if not sol.optimal:
        return -np.inf, None
    return float(sol.x[-1]), sol.x[:n]


def is_empty(P: HPoly, tol: float = TOL) -> bool:
    """True iff `{x | A x <= b}` is empty. Measure-zero sets are nonempty."""
    r, _ = P.chebyshev if isinstance(P, HPoly) else chebyshev_ball(P)
    return r < -tol


def is_usable(P: HPoly) -> bool:
    """True iff P is nonempty and every coordinate bound LP succeeds.

    Sets feasible only within the emptiness tolerance fail the bound LPs and count as unusable.
    """
    try:
        P.bbox
    except EmptySetError:
        return False
    return True


def witness(P: HPoly) -> Optional[FloatArray]:
    """A point of P (the Chebyshev center), or None when P is empty."""
    if is_empty(P):
        return None
    return P.chebyshev[1]


def intersect(P: HPoly, Q: HPoly) -> HPoly:
    _check_dim(P, Q.dim, 'second set')
    return HPoly(np.vstack([P.A, Q.A]), np.concatenate([P.b, Q.b]), normalize=False)


def intersects_interior(P: HPoly, Q: HPoly, tol: float = TOL) -> bool:
    """True iff P contains a point of the open interior of Q.

    Works for lower-dimensional P: only Q's rows are pushed inwards.
    """
    _check_dim(P, Q.dim, 'second set')
    n = P.dim
    norms = np.linalg.norm(Q.A, axis=1)
    A_ub = np.vstack([
        np.hstack([P.A, np.zeros((P.nrows, 1))]),
        np.hstack([Q.A, norms[:, None]]),
    ])
    b_ub = np.concatenate([P.b, Q.b])
    c = np.zeros(n + 1)
    c[-1] = -1.0
    sol = solve_lp(c, A_ub=A_ub, b_ub=b_ub, bounds=[(None, None)] * n + [(None, 1.0)])
    return sol.optimal and sol.x[-1] > tol


def extrude_time(S: HPoly, t0: float, t1: float) -> HPoly:
    """`{(p, t) | p in S, t0 <= t <= t1}`."""
    if not t0 < t1:
        raise ContractError(f'Extrusion needs t0 < t1, got [{t0}, {t1}]')
    d = S.dim
    A = np.zeros((S.nrows + 2, d + 1))
    A[:S.nrows, :d] = S.A
    A[S.nrows, d] = -1.0
    A[S.nrows + 1, d] = 1.0
    b = np.concatenate([S.b, [-t0, t1]])
    return HPoly(A, b)


def segment_tube(seg: Segment, r: float) -> Tube:
    """Sheared prism between the squares of apothem r around `seg.x` and `seg.y`."""
    if not seg.duration > 0:
        raise ContractError(f'Cannot build a tube around a zero-duration segment: {seg}')
    if not r > 0:
        raise ContractError(f'Tube apothem must be positive, got {r}')
    d = seg.x.d
    n = d + 1
    v = seg.velocity
    rows, rhs = [], []
    time_lo = np.zeros(n)
    time_lo[d] = -1.0
    time_hi = np.zeros(n)
    time_hi[d] = 1.0
    rows += [time_lo, time_hi]
    rhs += [-seg.x.t, seg.y.t]
    for k in range(d):
        offset = seg.x.p[k] - v[k] * seg.x.t
        for sign in (1.0, -1.0):
            row = np.zeros(n)
            row[k] = sign
            row[d] = -sign * v[k]
            rows.append(row)
            rhs.append(sign * offset + r)
    return Tube(np.array(rows), np.array(rhs), segment=seg, apothem=r)


def side_faces(L: Tube) -> List[SideFace]:
    """The 2d side faces of a tube, each with its outward closed complement."""
    if not isinstance(L, Tube):
        raise ContractError('side_faces expects a set built by segment_tube')
    faces = []
    for i in range(2, L.nrows):
        face = Halfspace(L.A[i].copy(), float(L.b[i]))
        faces.append(SideFace(face, face.complement()))
    return faces


def clip_segment(seg: Segment, P: HPoly, tol: float = TOL) -> Optional[Segment]:
    """Maximal sub-segment of `seg` inside P (parametric clipping), or None."""
    x0 = seg.x.vec
    _check_dim(P, x0.shape[0], 'segment')
    D = seg.y.vec - x0
    ad = P.A @ D
    slack = P.b - P.A @ x0 + 0.5 * tol
    s_lo, s_hi = 0.0, 1.0
    for a_d, sl in zip(ad, slack):
        if abs(a_d) <= 1e-15:
            if sl < 0:
                return None
            continue
        s = sl / a_d
        if a_d > 0:
            s_hi = min(s_hi, s)
        else:
            s_lo = max(s_lo, s)
        if s_lo > s_hi:
            return None
    if s_lo <= 0.0 and s_hi >= 1.0:
        return seg
    return Segment(State.from_vec(x0 + s_lo * D), State.from_vec(x0 + s_hi * D))


def bounding_box(P: HPoly) -> Box:
    """Per-coordinate bounds of P from 2n LPs."""
    if is_empty(P):
        raise EmptySetError('Cannot bound an empty set')
    n = P.dim
    lo, hi = np.empty(n), np.empty(n)
    for i in range(n):
        for sign in (1.0, -1.0):
            c = np.zeros(n)
            c[i] = sign
            sol = solve_lp(c, A_ub=P.A, b_ub=P.b, bounds=[(None, None)] * n)
            if sol.unbounded:
                raise UnboundedError(f'Set is unbounded along coordinate {i}')
            if not sol.optimal:
                raise EmptySetError('Cannot bound an empty set')
            if sign > 0:
                lo[i] = sol.fun
            else:
                hi[i] = -sol.fun
    return Box(lo, hi)


def time_interval_at(P: HPoly, p: ArrayLike, tol: float = TOL) -> Optional[Tuple[float, float]]:
    """`[t_lo, t_hi]` such that `(p, t)` lies in the space-time set P, or None.

    This is the one-variable LP `min/max t s.t. A_t t <= b - A_p p`, solved in closed form.
    """
    p = np.asarray(p, dtype=float)
    _check_dim(P, p.shape[0] + 1, 'goal line')
    coef = P.A[:, -1]
    rhs = P.b - P.A[:, :-1] @ p
    flat = np.abs(coef) <= 1e-15
    if np.any(rhs[flat] < -tol):
        return None
    up = coef > 1e-15
    down = coef < -1e-15
    t_hi = float(np.min(rhs[up] / coef[up])) if np.any(up) else np.inf
    t_lo = float(np.max(rhs[down] / coef[down])) if np.any(down) else -np.inf
    if t_lo > t_hi + tol:
        return None
    return t_lo, max(t_lo, t_hi)


def first_gap(intervals: Iterable[Tuple[float, float]], lo: float, hi: float, tol: float = TOL) -> Optional[Tuple[float, float]]:
    """First sub-interval of `[lo, hi]` covered by none of `intervals` (sort and sweep)."""
    reach = lo
    for a, b in sorted(intervals):
        if reach >= hi - tol:
            break
        if a > reach + tol:
            return reach, min(a, hi)
        reach = max(reach, b)
    if reach < hi - tol:
        return reach, hi
    return None


def interval_union_covers(intervals: Iterable[Tuple[float, float]], lo: float, hi: float, tol: float = TOL) -> bool:
    return first_gap(intervals, lo, hi, tol) is None


def reduce(P: HPoly, use_lp: bool = False, tol: float = TOL) -> HPoly:
    """Drop duplicate rows and, with `use_lp`, rows implied by the others."""
    if P.nrows == 0:
        return P
    Ab = np.round(np.hstack([P.A, P.b[:, None]]), 12)
    _, keep = np.unique(Ab, axis=0, return_index=True)
    keep = np.sort(keep)
    trivial = np.all(P.A[keep] == 0, axis=1) & (P.b[keep] >= 0)
    keep = keep[~trivial]
    A, b = P.A[keep], P.b[keep]
    if use_lp and len(keep) > 1:
        mask = np.ones(len(keep), dtype=bool)
        n = P.dim
        for i in range(len(keep)):
            mask[i] = False
            sol = solve_lp(-A[i], A_ub=A[mask], b_ub=b[mask], bounds=[(None, None)] * n)
            if not (sol.optimal and -sol.fun <= b[i] + tol):
                mask[i] = True
        A, b = A[mask], b[mask]
    return HPoly(A, b, normalize=False)
