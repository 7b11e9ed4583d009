import numpy as np
import pytest

from stgcs.src.errors import ContractError, EmptySetError, SolverError, UnboundedError
from stgcs.src.geom import (
    HPoly, Halfspace, Segment, State, bounding_box, chebyshev_ball, clip_segment, contains,
    extrude_time, first_gap, interval_union_covers, intersect, intersects_interior, is_empty, is_usable,
    reduce, segment_tube, side_faces, time_interval_at, witness,
)
from stgcs.src.lp import FALLBACK_OPTIONS, NUMERICAL, solve_lp

from .conftest import box


def seg(p0, t0, p1, t1):
    return Segment(State(p0, t0), State(p1, t1))


class TestHPoly:
    def test_rows_are_normalized(self):
        P = HPoly([[2.0, 0.0], [0.0, -4.0]], [4.0, 8.0])
        np.testing.assert_allclose(np.max(np.abs(P.A), axis=1), 1.0)
        np.testing.assert_allclose(P.b, [2.0, 2.0])

    def test_row_count_mismatch(self):
        with pytest.raises(ContractError):
            HPoly([[1.0, 0.0]], [1.0, 2.0])

    def test_arrays_are_read_only(self, unit_box):
        with pytest.raises(ValueError):
            unit_box.A[0, 0] = 3.0

    def test_contains_is_inclusive(self, unit_box):
        assert contains(unit_box, [1.0, 0.5])
        assert contains(unit_box, [1.0 + 1e-10, 0.5])
        assert not contains(unit_box, [1.1, 0.5])

    def test_contains_dimension_mismatch(self, unit_box):
        with pytest.raises(ContractError):
            contains(unit_box, [0.5, 0.5, 0.5])

    def test_with_halfspace(self, unit_box):
        half = unit_box.with_halfspace(Halfspace(np.array([1.0, 0.0]), 0.5))
        assert half.contains([0.25, 0.5])
        assert not half.contains([0.75, 0.5])


class TestEmptiness:
    def test_box_is_nonempty(self, unit_box):
        r, center = chebyshev_ball(unit_box)
        assert r == pytest.approx(0.5)
        np.testing.assert_allclose(center, [0.5, 0.5], atol=1e-9)

    def test_inverted_box_is_empty(self):
        assert is_empty(box([1, 1], [0, 0]))
        assert witness(box([1, 1], [0, 0])) is None

    def test_flat_set_is_nonempty(self):
        assert not is_empty(box([0, 0], [0, 1]))

    def test_disjoint_intersection(self):
        assert is_empty(intersect(box([0, 0], [1, 1]), box([2, 2], [3, 3])))

    def test_touching_intersection_is_nonempty(self):
        assert not is_empty(intersect(box([0, 0], [1, 1]), box([1, 0], [2, 1])))


class TestInteriorIntersection:
    def test_shared_face_only(self):
        assert not intersects_interior(box([0, 0], [1, 1]), box([1, 0], [2, 1]))

    def test_overlap(self):
        assert intersects_interior(box([0, 0], [1, 1]), box([0.5, 0.5], [2, 2]))

    def test_flat_set_inside(self, unit_box):
        assert intersects_interior(box([0.5, 0.5], [0.5, 0.9]), unit_box)


class TestBoundingBox:
    def test_extruded_box(self):
        X = extrude_time(box([0, 0], [10, 10]), 0.0, 50.0)
        bb = bounding_box(X)
        np.testing.assert_allclose(bb.lo, [0, 0, 0], atol=1e-9)
        np.testing.assert_allclose(bb.hi, [10, 10, 50], atol=1e-9)

    def test_unbounded(self):
        with pytest.raises(UnboundedError):
            bounding_box(HPoly([[1.0, 0.0]], [1.0]))

    def test_empty(self):
        with pytest.raises(EmptySetError):
            bounding_box(box([1, 1], [0, 0]))


class TestExtrusion:
    def test_contains(self):
        X = extrude_time(box([0, 0], [10, 10]), 0.0, 50.0)
        assert X.dim == 3
        assert X.contains([5, 5, 10])
        assert not X.contains([5, 5, 51])

    def test_bad_interval(self, unit_box):
        with pytest.raises(ContractError):
            extrude_time(unit_box, 2.0, 1.0)

    def test_time_interval_at(self):
        X = extrude_time(box([0, 0], [10, 10]), 0.0, 50.0)
        lo, hi = time_interval_at(X, [5, 5])
        assert lo == pytest.approx(0.0, abs=1e-9)
        assert hi == pytest.approx(50.0)
        assert time_interval_at(X, [11, 5]) is None


class TestTube:
    def test_membership(self):
        L = segment_tube(seg((0, 0), 0.0, (1, 0), 1.0), 0.1)
        assert L.contains([0.5, 0.05, 0.5])
        assert not L.contains([0.5, 0.2, 0.5])
        assert not L.contains([0.5, 0.0, 1.1])
        # the square moves with the segment
        assert L.contains([0.95, 0.0, 1.0])
        assert not L.contains([0.95, 0.0, 0.0])

    def test_row_layout(self):
        L = segment_tube(seg((0, 0), 0.0, (2, 1), 2.0), 0.5)
        assert L.nrows == 6
        np.testing.assert_allclose(L.A[0], [0, 0, -1])
        np.testing.assert_allclose(L.A[1], [0, 0, 1])
        faces = side_faces(L)
        assert len(faces) == 4
        for face, outside in faces:
            np.testing.assert_allclose(outside.a, -face.a)

    def test_bbox(self):
        L = segment_tube(seg((0, 0), 0.0, (2, 1), 2.0), 0.5)
        np.testing.assert_allclose(L.bbox.lo, [-0.5, -0.5, 0.0])
        np.testing.assert_allclose(L.bbox.hi, [2.5, 1.5, 2.0])

    def test_degenerate(self):
        with pytest.raises(ContractError):
            segment_tube(seg((0, 0), 1.0, (1, 0), 1.0), 0.1)
        with pytest.raises(ContractError):
            segment_tube(seg((0, 0), 0.0, (1, 0), 1.0), 0.0)

    def test_zero_duration_velocity(self):
        with pytest.raises(ContractError):
            seg((0, 0), 1.0, (1, 0), 1.0).velocity


class TestClip:
    def test_crossing(self):
        X = extrude_time(box([0, 0], [1, 1]), 0.0, 10.0)
        piece = clip_segment(seg((-1, 0.5), 0.0, (2, 0.5), 3.0), X)
        assert piece.x.t == pytest.approx(1.0, abs=1e-8)
        assert piece.y.t == pytest.approx(2.0, abs=1e-8)
        assert piece.x.p[0] == pytest.approx(0.0, abs=1e-8)
        assert piece.y.p[0] == pytest.approx(1.0, abs=1e-8)

    def test_whole(self):
        X = extrude_time(box([0, 0], [1, 1]), 0.0, 10.0)
        s = seg((0.2, 0.5), 0.0, (0.8, 0.5), 3.0)
        assert clip_segment(s, X) is s

    def test_miss(self):
        X = extrude_time(box([0, 0], [1, 1]), 0.0, 10.0)
        assert clip_segment(seg((2, 2), 0.0, (3, 3), 1.0), X) is None


class TestIntervals:
    def test_cover(self):
        assert interval_union_covers([(2, 5), (0, 2)], 0, 5)
        assert interval_union_covers([(0, 3), (1, 6)], 0, 5)
        assert not interval_union_covers([(0, 2), (3, 5)], 0, 5)

    def test_first_gap(self):
        assert first_gap([(0, 2), (3, 5)], 0, 5) == (2, 3)
        assert first_gap([(0, 2)], 0, 5) == (2, 5)
        assert first_gap([], 1, 2) == (1, 2)


def test_reduce_drops_duplicate_rows(unit_box):
    P = unit_box.with_rows(unit_box.A, unit_box.b)
    assert P.nrows == 8
    assert reduce(P).nrows == 4


def test_reduce_with_lp_drops_implied_rows(unit_box):
    P = unit_box.with_halfspace(Halfspace(np.array([1.0, 0.0]), 5.0))
    assert reduce(P, use_lp=True).nrows == 4


class TestUsable:
    def test_box(self, unit_box):
        assert is_usable(unit_box)

    def test_flat_set(self):
        assert is_usable(box([0, 0], [0, 1]))

    def test_empty(self):
        assert not is_usable(box([1, 1], [0, 0]))


class TestSolveLp:
    def test_numerical_failure_is_retried(self, flaky_linprog):
        calls = flaky_linprog(failures=1)
        sol = solve_lp(np.array([1.0, 1.0]), A_ub=-np.eye(2), b_ub=-np.ones(2))
        assert sol.optimal
        assert sol.fun == pytest.approx(2.0)
        assert len(calls) == 2
        assert calls[1] == FALLBACK_OPTIONS[0]

    def test_every_attempt_fails(self, flaky_linprog):
        calls = flaky_linprog()
        with pytest.raises(SolverError) as info:
            solve_lp(np.array([1.0]), bounds=[(0, 1)])
        assert info.value.status == NUMERICAL
        assert len(calls) == 1 + len(FALLBACK_OPTIONS)

    def test_infeasible_is_not_retried(self, flaky_linprog):
        calls = flaky_linprog(failures=0)
        sol = solve_lp(np.array([1.0]), A_ub=np.array([[1.0], [-1.0]]), b_ub=np.array([0.0, -1.0]))
        assert sol.infeasible and sol.x is None
        assert len(calls) == 1
