import itertools

import pytest

from stgcs.src.errors import ContractError, EmptySetError
from stgcs.src.geom import Segment, State, extrude_time, intersect, is_empty, is_usable
from stgcs.src.stgraph import (
    SpaceTimeGraph, build_graph, goal_line_intervals, goal_vertices, insert_decomposition, start_vertices,
)

from .conftest import box


def test_single_box(empty_graph):
    assert empty_graph.num_vertices == 1
    assert empty_graph.num_edges == 0
    assert empty_graph.d == 2
    assert empty_graph[0].dim == 3


def test_edges_follow_closed_intersection():
    G = build_graph([box([0, 0], [1, 1]), box([1, 0], [2, 1]), box([5, 5], [6, 6]), box([0.5, 0.5], [1.5, 1.5])], 10.0)
    assert G.has_edge(0, 1)  # shared face
    assert G.has_edge(0, 3)
    assert G.has_edge(1, 3)
    assert G.neighbors(2) == []


def test_build_graph_contracts():
    with pytest.raises(ContractError):
        build_graph([], 10.0)
    with pytest.raises(ContractError):
        build_graph([box([0, 0], [1, 1])], 0.0)
    with pytest.raises(EmptySetError):
        build_graph([box([0, 0], [1, 1]), box([2, 2], [1, 1])], 10.0)
    with pytest.raises(ContractError):
        build_graph([box([0, 0], [1, 1]), box([0, 0, 0], [1, 1, 1])], 10.0)


def test_add_vertex_checks_dimension(empty_graph):
    with pytest.raises(ContractError):
        empty_graph.add_vertex(box([0, 0], [1, 1]))


def test_start_vertices():
    G = build_graph([box([0, 0], [2, 2]), box([1, 1], [3, 3])], 10.0)
    assert start_vertices(G, State((1.5, 1.5), 0.0)) == [0, 1]
    assert start_vertices(G, State((0.5, 0.5), 0.0)) == [0]
    assert start_vertices(G, State((5, 5), 0.0)) == []
    assert start_vertices(G, State((0.5, 0.5), 11.0)) == []


def test_goal_vertices_open_map(empty_graph):
    [(vid, t_entry)] = goal_vertices(empty_graph, (3, 4))
    assert vid == 0
    assert t_entry == pytest.approx(0.0, abs=1e-9)
    assert goal_vertices(empty_graph, (11, 4)) == []


def test_goal_vertices_need_a_holdable_goal():
    # the goal column is split in time: [0, 20] in one set, [20, 50] in another
    X0 = extrude_time(box([0, 0], [1, 1]), 0.0, 20.0)
    X1 = extrude_time(box([0, 0], [1, 1]), 20.0, 50.0)
    X2 = extrude_time(box([0, 0], [1, 1]), 0.0, 10.0)
    G = SpaceTimeGraph(50.0, 2)
    for X in (X0, X1):
        G.add_vertex(X)
    assert [v for v, _ in goal_vertices(G, (0.5, 0.5))] == [0, 1]

    H = SpaceTimeGraph(50.0, 2)
    H.add_vertex(X2)
    assert goal_line_intervals(H, (0.5, 0.5))[0] == (pytest.approx(0.0, abs=1e-9), pytest.approx(10.0))
    assert goal_vertices(H, (0.5, 0.5)) == []


def test_clip_splits_at_shared_face():
    G = build_graph([box([0, 0], [1, 1]), box([1, 0], [2, 1])], 10.0)
    seg = Segment(State((0.5, 0.5), 0.0), State((1.5, 0.5), 1.0))
    pieces = G.clip(seg)
    assert [v for v, _ in pieces] == [0, 1]
    assert pieces[0][1].y.t == pytest.approx(0.5, abs=1e-8)
    assert pieces[1][1].x.t == pytest.approx(0.5, abs=1e-8)
    assert G.covers([1.0, 0.5, 0.5])
    assert not G.covers([3.0, 0.5, 0.5])


def test_insert_decomposition_copies():
    G = build_graph([box([0, 0], [2, 1]), box([2, 0], [4, 1])], 10.0)
    halves = [extrude_time(box([0, 0], [1, 1]), 0.0, 10.0), extrude_time(box([1, 0], [2, 1]), 0.0, 10.0),
              extrude_time(box([5, 5], [4, 4]), 0.0, 10.0)]
    H = insert_decomposition(G, 0, halves)
    assert G.num_vertices == 2 and G.has_edge(0, 1)
    assert 0 not in H
    assert H.num_vertices == 3  # the empty set is dropped
    new_ids = [v for v in H.vertex_ids if v != 1]
    assert H.has_edge(new_ids[0], new_ids[1])
    assert H.has_edge(new_ids[1], 1)
    assert not H.has_edge(new_ids[0], 1)
    with pytest.raises(ContractError):
        insert_decomposition(G, 42, halves)


def test_serialization_keeps_structure():
    G = build_graph([box([0, 0], [1, 1]), box([1, 0], [2, 1])], 10.0)
    H = SpaceTimeGraph.from_dict(G.to_dict())
    assert H.edges == G.edges
    assert H.t_max == G.t_max
    assert H.add_vertex(extrude_time(box([5, 5], [6, 6]), 0.0, 10.0)) == 2


def test_stats(empty_graph):
    assert empty_graph.stats() == {'vertices': 1, 'edges': 0, 'max_rows': 6}


def _assert_edges_complete(G):
    for u, v in itertools.combinations(G.vertex_ids, 2):
        assert G.has_edge(u, v) == (not is_empty(intersect(G[u], G[v]))), (u, v)


def test_replace_vertex_keeps_edges_complete():
    G = build_graph([box([0, 0], [4, 2]), box([4, 0], [6, 2]), box([0, 2], [2, 6]), box([8, 8], [9, 9])], 10.0)
    pieces = [extrude_time(box([0, 0], [2, 2]), 0.0, 10.0),
              extrude_time(box([2, 0], [4, 2]), 0.0, 5.0),
              extrude_time(box([2, 0], [4, 2]), 5.0, 10.0)]
    added = G.replace_vertex(0, pieces)
    assert len(added) == 3
    _assert_edges_complete(G)
    assert not G.has_edge(added[0], 1)
    assert G.has_edge(added[1], 1) and G.has_edge(added[2], 1)


def test_replace_vertex_drops_empty_children():
    G = build_graph([box([0, 0], [2, 1]), box([2, 0], [4, 1])], 10.0)
    empty = extrude_time(box([0, 0], [1, 1]), 0.0, 10.0).with_rows([[1.0, 0.0, 0.0]], [-1.0])
    assert not is_usable(empty)
    added = G.replace_vertex(0, [empty, extrude_time(box([0, 0], [2, 1]), 0.0, 10.0)])
    assert len(added) == 1
    assert G.num_vertices == 2 and G.has_edge(added[0], 1)
