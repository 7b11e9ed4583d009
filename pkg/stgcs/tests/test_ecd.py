import numpy as np
import pytest

from stgcs.src.ecd import (
    Reservation, canonicalize, decompose_one, reserve, reserve_all, vertex_segment_sequence,
)
from stgcs.src.errors import ContractError, CoverageError
from stgcs.src.gcsprog import SolveParams, Trajectory, solve_stgcs
from stgcs.src.geom import Segment, State, extrude_time, intersects_interior, segment_tube
from stgcs.src.mrmp import collide, min_separation
from stgcs.src.stgraph import build_graph

from .conftest import box


def traj(*states):
    return Trajectory([State(p, t) for p, t in states])


def seg(p0, t0, p1, t1):
    return Segment(State(p0, t0), State(p1, t1))


def _assert_partition(X, children, tube, rng, n=10_000):
    """Points of X outside the open tube lie in exactly one child; children avoid the open tube."""
    lo, hi = X.bbox.lo, X.bbox.hi
    pts = rng.uniform(lo, hi, size=(n, len(lo)))
    in_tube = np.all(pts @ tube.A.T < tube.b - 1e-7, axis=1)
    counts = np.zeros(n, dtype=int)
    for C in children:
        inside = np.all(pts @ C.A.T <= C.b + 1e-9, axis=1)
        assert not np.any(inside & in_tube)
        counts += inside
    near_tube = np.all(pts @ tube.A.T <= tube.b + 1e-7, axis=1)
    assert np.all(counts[~near_tube] == 1)


class TestCanonicalize:
    def test_full_span_unchanged(self):
        T = traj(((0, 0), 0.0), ((1, 0), 50.0))
        assert canonicalize(T, 50.0) == T

    def test_waits_added(self):
        out = canonicalize(traj(((0, 0), 5.0), ((1, 0), 6.0)), 50.0)
        assert out.key() == traj(((0, 0), 0.0), ((0, 0), 5.0), ((1, 0), 6.0), ((1, 0), 50.0)).key()

    def test_single_state_column(self):
        out = canonicalize(traj(((2, 2), 10.0)), 50.0)
        assert out.key() == traj(((2, 2), 0.0), ((2, 2), 10.0), ((2, 2), 50.0)).key()

    def test_duplicate_states_collapse(self):
        out = canonicalize(traj(((0, 0), 0.0), ((0, 0), 0.0), ((1, 0), 50.0)), 50.0)
        assert len(out) == 2

    def test_outside_horizon(self):
        with pytest.raises(ContractError):
            canonicalize(traj(((0, 0), 0.0), ((1, 0), 60.0)), 50.0)


class TestVertexSegmentSequence:
    def test_one_set(self, empty_graph):
        T = traj(((1, 1), 0.0), ((2, 2), 4.0))
        [vs] = vertex_segment_sequence(empty_graph, T)
        assert vs.vertex_id == 0
        assert vs.seg.duration == pytest.approx(4.0)

    def test_crossing_a_face(self):
        G = build_graph([box([0, 0], [1, 1]), box([1, 0], [2, 1])], 10.0)
        pieces = vertex_segment_sequence(G, traj(((0.5, 0.5), 0.0), ((1.5, 0.5), 1.0)))
        assert [p.vertex_id for p in pieces] == [0, 1]
        assert pieces[0].seg.y.t == pytest.approx(0.5, abs=1e-8)

    def test_face_riding_segment_reports_both(self):
        G = build_graph([box([0, 0], [1, 1]), box([1, 0], [2, 1])], 10.0)
        pieces = vertex_segment_sequence(G, traj(((1, 0.2), 0.0), ((1, 0.8), 1.0)))
        assert [p.vertex_id for p in pieces] == [0, 1]

    def test_leaving_free_space(self):
        G = build_graph([box([0, 0], [1, 1]), box([2, 0], [3, 1])], 10.0)
        T = traj(((0.5, 0.5), 0.0), ((2.5, 0.5), 2.0))
        with pytest.raises(CoverageError) as exc:
            vertex_segment_sequence(G, T)
        assert exc.value.gap[0] == pytest.approx(0.5, abs=1e-6)
        assert len(vertex_segment_sequence(G, T, strict=False)) == 2


class TestDecomposeOne:
    X = extrude_time(box([0, 0], [10, 10]), 0.0, 50.0)

    def test_interior_segment(self, rng):
        s = seg((4, 4), 10.0, (6, 5), 20.0)
        children = decompose_one(self.X, s, 0.5)
        assert len(children) == 6
        _assert_partition(self.X, children, segment_tube(s, 0.5), rng)

    def test_full_time_span(self, rng):
        s = seg((4, 4), 0.0, (6, 5), 50.0)
        children = decompose_one(self.X, s, 0.5)
        assert len(children) == 4
        _assert_partition(self.X, children, segment_tube(s, 0.5), rng)

    def test_tube_covers_cross_section(self):
        X = extrude_time(box([0, 0], [1, 1]), 0.0, 50.0)
        children = decompose_one(X, seg((0.5, 0.5), 10.0, (0.5, 0.5), 20.0), 1.0)
        assert len(children) == 2
        spans = sorted(C.time_extent() for C in children)
        assert spans[0][1] == pytest.approx(10.0, abs=1e-7)
        assert spans[1][0] == pytest.approx(20.0, abs=1e-7)

    def test_degenerate(self):
        with pytest.raises(ContractError):
            decompose_one(self.X, seg((4, 4), 10.0, (4, 4), 10.0), 0.5)


class TestReserve:
    def test_stationary_column(self, empty_graph):
        res = Reservation(traj(((5, 5), 0.0)), 1.0)
        H = reserve(empty_graph, res)
        assert H.num_vertices == 4
        assert H.num_edges == 4
        assert empty_graph.num_vertices == 1
        assert not H.covers([5.0, 5.0, 25.0])
        assert H.covers([6.0, 5.0, 25.0])

    def test_reserve_twice_is_a_noop(self, empty_graph):
        res = Reservation(traj(((1, 5), 0.0), ((9, 5), 16.0)), 1.0)
        once = reserve(empty_graph, res)
        twice = reserve(once, res)
        assert twice.vertex_ids == once.vertex_ids
        assert twice.edges == once.edges

    def test_reserve_all_keeps_original(self, empty_graph):
        reservations = [Reservation(traj(((2, 2), 0.0)), 0.5), Reservation(traj(((8, 8), 0.0)), 0.5)]
        H = reserve_all(empty_graph, reservations)
        assert H.num_vertices > 4
        assert empty_graph.num_vertices == 1

    def test_crossing_robot_avoids_reserved_one(self, empty_graph, vb_one):
        params = SolveParams(path_budget=30)
        first = solve_stgcs(empty_graph, State((1, 5), 0.0), (9, 5), vb_one, params)
        H = reserve(empty_graph, Reservation(first.trajectory, 1.0))
        second = solve_stgcs(H, State((5, 1), 0.0), (5, 9), vb_one, params)
        assert second.success
        assert second.cost > 8.0
        assert collide(first.trajectory, second.trajectory, 1.0 - 1e-6, H.t_max) is None

    def test_random_queries_avoid_reserved_one(self, empty_graph, vb_one, rng):
        params = SolveParams(path_budget=30, restriction_retries=2)
        first = solve_stgcs(empty_graph, State((1, 5), 0.0), (9, 5), vb_one, params)
        H = reserve(empty_graph, Reservation(first.trajectory, 1.0))

        def off_lane():
            p = rng.uniform(0, 10, 2)
            p[1] = rng.uniform(0, 3.5) if rng.random() < 0.5 else rng.uniform(6.5, 10)
            return p

        for _ in range(20):
            start, goal = off_lane(), off_lane()
            res = solve_stgcs(H, State(tuple(start), 0.0), goal, vb_one, params)
            assert res.success, res.to_report()
            assert collide(first.trajectory, res.trajectory, 1.0 - 1e-6, H.t_max) is None
            sep, _ = min_separation(first.trajectory, res.trajectory, 1e-3, H.t_max)
            assert sep >= 1.0 - 1e-6

    def test_serialization(self):
        res = Reservation(traj(((0, 0), 0.0), ((1, 0), 2.0)), 0.55)
        data = res.to_dict()
        assert data['apothem'] == 0.55
        assert Reservation.from_dict(data).trajectory == res.trajectory

    def test_bad_apothem(self):
        with pytest.raises(ContractError):
            Reservation(traj(((0, 0), 0.0)), 0.0)


class TestReserveSeveralSets:
    G = build_graph([box([0, 0], [5, 5]), box([5, 0], [10, 5]), box([0, 5], [5, 10]), box([5, 5], [10, 10])], 50.0)
    res = Reservation(traj(((1, 1), 0.0), ((9, 9), 16.0)), 0.75)

    def _tubes(self):
        T = canonicalize(self.res.trajectory, self.G.t_max)
        return [segment_tube(s, self.res.tube_apothem) for s in T.segments() if s.duration > 0]

    def test_pieces_are_indexed(self):
        T = canonicalize(self.res.trajectory, self.G.t_max)
        sequence = vertex_segment_sequence(self.G, T)
        assert {vs.piece for vs in sequence} == {0, 1}
        assert all(vs.piece == 1 for vs in sequence if vs.seg.x.t >= 16.0 - 1e-9)

    def test_children_avoid_tube_interior(self):
        H = reserve(self.G, self.res)
        for vid in H.vertex_ids:
            for L in self._tubes():
                assert not intersects_interior(H[vid], L)

    def test_coverage_and_no_growth(self, rng):
        H = reserve(self.G, self.res)
        tubes = self._tubes()
        pts = rng.uniform([0, 0, 0], [10, 10, 50], size=(5000, 3))
        near = np.zeros(len(pts), dtype=bool)
        for L in tubes:
            near |= np.all(pts @ L.A.T <= L.b + 1e-6, axis=1)
        in_H = np.zeros(len(pts), dtype=bool)
        for X in H.vertices.values():
            in_H |= np.all(pts @ X.A.T <= X.b + 1e-9, axis=1)
        in_G = np.zeros(len(pts), dtype=bool)
        for X in self.G.vertices.values():
            in_G |= np.all(pts @ X.A.T <= X.b + 1e-9, axis=1)
        assert np.all(in_G[~near] & in_H[~near])
        assert not np.any(in_H & ~in_G)

    def test_sets_holding_the_path_are_split_without_interior_checks(self, monkeypatch):
        monkeypatch.setattr('stgcs.src.ecd.intersects_interior', lambda P, Q, tol=1e-9: False)
        H = reserve(self.G, self.res)
        assert 0 not in H and 3 not in H
        assert not H.covers([3.0, 3.0, 4.0]) and not H.covers([7.0, 7.0, 12.0])
        assert not H.covers([9.0, 9.0, 30.0])
