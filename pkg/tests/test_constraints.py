import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfr.constraints import (ConflictCountTable, MoveId, NegativeConstraint, PositiveConstraint,
                               StalePathError, TimedPath, constraints_satisfied, make_motion, path_conflicts)
from mapfr.geometry import TimeInterval, conflict_predicate
from mapfr.world import GridMap, build_grid_graph, neighborhood

GRID = build_grid_graph(GridMap.empty(4, 4), neighborhood(3))
SHAPE = 2 * math.sqrt(2) / 4


def path_from(agent, graph, steps, start_vertex):
    """steps: list of (next vertex or None for a wait, wait length)."""
    motions, t, v = [], 0.0, start_vertex
    for nxt, pause in steps:
        if pause > 0:
            motions.append(make_motion(graph, v, v, t, pause))
            t += pause
        if nxt is not None:
            motions.append(make_motion(graph, v, nxt, t))
            t += graph.weight(v, nxt)
            v = nxt
    return TimedPath(agent, tuple(motions), start_vertex, v)


@st.composite
def random_path(draw, agent):
    v = draw(st.integers(0, len(GRID) - 1))
    steps = []
    cur = v
    for _ in range(draw(st.integers(0, 5))):
        nbrs = sorted(w for w, _ in GRID.adjacency[cur])
        nxt = draw(st.sampled_from(nbrs))
        pause = draw(st.sampled_from([0.0, 0.0, 0.25, 0.5, 1.0, 1.7]))
        steps.append((nxt, pause))
        cur = nxt
    return path_from(agent, GRID, steps, v)


def brute_pairs(paths):
    """All-pairs motion scan without any pruning."""
    out = set()
    for a in paths:
        for b in paths:
            if a.agent == b.agent:
                continue
            for ma in a.with_rest(GRID):
                for mb in b.with_rest(GRID):
                    if conflict_predicate(ma.segment, mb.segment, SHAPE):
                        out.add(((a.agent, ma.move, ma.start), (b.agent, mb.move, mb.start)))
    return out


def test_empty_constraint_set_is_satisfied():
    p = path_from(0, GRID, [(1, 0.0)], 0)
    assert constraints_satisfied(p, [])


def test_blocked_interval_is_half_open():
    p = path_from(0, GRID, [(1, 0.5)], 0)          # move 0->1 starts at 0.5
    mv = MoveId(0, 1)
    assert not constraints_satisfied(p, [NegativeConstraint(0, mv, TimeInterval(0.5, 1.0))])
    assert constraints_satisfied(p, [NegativeConstraint(0, mv, TimeInterval(0.0, 0.5))])
    assert constraints_satisfied(p, [NegativeConstraint(1, mv, TimeInterval(0.0, 1.0))])


def test_wait_constraint_blocks_presence():
    p = path_from(0, GRID, [(1, 0.5)], 0)          # at vertex 0 during [0, 0.5], then at 1 from 1.5
    assert not constraints_satisfied(p, [NegativeConstraint(0, MoveId(0, 0), TimeInterval(0.4, 0.6))])
    assert constraints_satisfied(p, [NegativeConstraint(0, MoveId(0, 0), TimeInterval(0.6, 2.0))])
    assert not constraints_satisfied(p, [NegativeConstraint(0, MoveId(1, 1), TimeInterval(5.0, 6.0))])


def test_landmark_must_be_executed_in_window():
    p = path_from(0, GRID, [(1, 0.5)], 0)
    assert constraints_satisfied(p, [], [PositiveConstraint(0, MoveId(0, 1), TimeInterval(0.0, 1.0))])
    assert not constraints_satisfied(p, [], [PositiveConstraint(0, MoveId(0, 1), TimeInterval(0.6, 1.0))])
    assert not constraints_satisfied(p, [], [PositiveConstraint(0, MoveId(0, 4), TimeInterval(0.0, 9.0))])


def test_constraint_types_reject_empty_windows():
    with pytest.raises(ValueError):
        NegativeConstraint(0, MoveId(0, 1), TimeInterval(1.0, 1.0))
    with pytest.raises(ValueError):
        PositiveConstraint(0, MoveId(0, 0), TimeInterval(0.0, 1.0))


def test_non_interacting_agents_give_empty_table():
    a = path_from(0, GRID, [(1, 0.0)], 0)
    b = path_from(1, GRID, [(14, 0.0)], 15)
    assert ConflictCountTable.rebuild([a, b], GRID, SHAPE).total == 0


def test_triangle_rotation_conflict_listed_under_both_agents(triangle):
    g = triangle.graph
    paths = [TimedPath(k, (make_motion(g, s, t, 0.0),), s, t) for k, (s, t) in enumerate([(0, 1), (1, 2), (2, 0)])]
    table = ConflictCountTable.rebuild(paths, g, triangle.shape_sum)
    assert (2, MoveId(2, 0), 0.0) in table.conflicts_of(0, MoveId(0, 1), 0.0)
    assert (0, MoveId(0, 1), 0.0) in table.conflicts_of(2, MoveId(2, 0), 0.0)
    found = path_conflicts(paths[0], paths[2], g, triangle.shape_sum)
    assert any(c.motion_i.move == MoveId(0, 1) and c.motion_j.move == MoveId(2, 0) for c in found)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_table_matches_brute_force_scan(data):
    paths = [data.draw(random_path(k)) for k in range(3)]
    table = ConflictCountTable.rebuild(paths, GRID, SHAPE)
    assert table.as_pairs() == brute_pairs(paths)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_incremental_replacement_equals_rebuild(data):
    paths = [data.draw(random_path(k)) for k in range(3)]
    table = ConflictCountTable.rebuild(paths, GRID, SHAPE)
    for _ in range(4):
        k = data.draw(st.integers(0, 2))
        new = data.draw(random_path(k))
        table.replace_path(k, paths[k], new)
        paths[k] = new
        assert table.as_pairs() == ConflictCountTable.rebuild(paths, GRID, SHAPE).as_pairs()


def test_stale_replacement_is_rejected():
    a = path_from(0, GRID, [(1, 0.0)], 0)
    b = path_from(1, GRID, [(14, 0.0)], 15)
    table = ConflictCountTable.rebuild([a, b], GRID, SHAPE)
    with pytest.raises(StalePathError):
        table.replace_path(0, b, a)
    table.replace_path(0, a, a)
    assert table.total == 0
