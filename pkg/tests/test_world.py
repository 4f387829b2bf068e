import math
from math import gcd

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mapfr.geometry import DEFAULT_RADIUS, Point2, point_segment_distance
from mapfr.world import (Graph, GridMap, InputError, Instance, ParseError, build_grid_graph, dump_roadmap,
                         goal_distances, grid_instance, load_roadmap, neighborhood, neighborhood_from_size,
                         parse_map, parse_scen)

MAP_2X2 = "type octile\nheight 2\nwidth 2\nmap\n..\n..\n"


def test_parse_open_map():
    g = parse_map(MAP_2X2)
    assert (g.width, g.height, g.blocked_count) == (2, 2, 0)


def test_parse_blocked_cell_and_crlf():
    g = parse_map("type octile\r\nheight 1\r\nwidth 3\r\nmap\r\n.@G\r\n")
    assert g.is_blocked(1, 0) and not g.is_blocked(0, 0) and not g.is_blocked(2, 0)


def test_empty_8_8_round_trip():
    g = parse_map(GridMap.empty(8, 8).to_text())
    assert (g.width, g.height, g.blocked_count) == (8, 8, 0)


@pytest.mark.parametrize("text, line", [
    ("type octile\nheight 2\nwidth 2\n..\n..\n", 4),
    ("type octile\nheight 2\nwidth 2\nmap\n..\n.\n", 6),
    ("type octile\nheight 1\nwidth 2\nmap\n.x\n", 5),
    ("type octile\nheight 2\nmap\n..\n..\n", 4),
])
def test_parse_map_errors_carry_line(text, line):
    with pytest.raises(ParseError) as err:
        parse_map(text)
    assert err.value.line is not None


def test_parse_scen_fields():
    assert parse_scen("version 1\n") == []
    assert parse_scen("version 1\n0\tm.map\t8\t8\t0\t0\t7\t7\t9.899\n") == [((0, 0), (7, 7))]
    assert parse_scen("version 1\n0 m.map 8 8 0 0 7 7 9.899\n") == [((0, 0), (7, 7))]


@pytest.mark.parametrize("text", [
    "version 2\n",
    "0\tm.map\t8\t8\t0\t0\t7\t7\t1\n",
    "version 1\n0\tm.map\t8\t8\t0\t0\t8\t7\t1\n",
    "version 1\n0\tm.map\t8\t8\t0\t0\t7\n",
])
def test_parse_scen_errors(text):
    with pytest.raises(ParseError):
        parse_scen(text)


# --- neighborhoods ---------------------------------------------------------------


def _first_quadrant(offsets):
    q = [o for o in offsets if o[0] >= 0 and o[1] >= 0]
    return sorted(q, key=lambda o: math.atan2(o[1], o[0]))


@pytest.mark.parametrize("k, size", [(2, 4), (3, 8), (4, 16), (5, 32)])
def test_neighborhood_sizes_and_symmetry(k, size):
    spec = neighborhood(k)
    offs = set(spec.offsets)
    assert len(spec.offsets) == size == spec.size
    for dx, dy in offs:
        assert gcd(abs(dx), abs(dy)) == 1
        for sym in ((-dy, dx), (dx, -dy), (-dx, dy), (dy, dx)):
            assert sym in offs
    angles = [math.atan2(dy, dx) % (2 * math.pi) for dx, dy in spec.offsets]
    assert angles == sorted(angles) and len(set(angles)) == len(angles)


def test_neighborhood_mediant_order():
    assert (1, 1) in neighborhood(3).offsets
    assert _first_quadrant(neighborhood(5).offsets) == [
        (1, 0), (3, 1), (2, 1), (3, 2), (1, 1), (2, 3), (1, 2), (1, 3), (0, 1)]


def test_neighborhood_rejects_other_sizes():
    with pytest.raises(InputError):
        neighborhood(6)
    with pytest.raises(InputError):
        neighborhood_from_size(12)


# --- grid graphs -----------------------------------------------------------------


def test_grid_graph_edge_counts():
    empty = GridMap.empty(3, 3)
    assert build_grid_graph(empty, neighborhood(2)).num_edges == 12
    assert build_grid_graph(empty, neighborhood(3)).num_edges == 20
    assert len(build_grid_graph(empty, neighborhood(2))) == 9


def _box_distance_sampled(a, b, cell, n=1000):
    ts = np.linspace(0, 1, n)
    xs, ys = a[0] + ts * (b[0] - a[0]), a[1] + ts * (b[1] - a[1])
    cx, cy = cell
    dx = np.maximum(np.maximum(cx - 0.5 - xs, xs - cx - 0.5), 0)
    dy = np.maximum(np.maximum(cy - 0.5 - ys, ys - cy - 0.5), 0)
    return float(np.hypot(dx, dy).min())


def test_blocked_center_removes_close_diagonals():
    grid = parse_map("type octile\nheight 3\nwidth 3\nmap\n...\n.@.\n...\n")
    g = build_grid_graph(grid, neighborhood(3), DEFAULT_RADIUS)
    pos = g.positions
    diagonals = [(u, v) for u, v, w in g.edges if abs(w - math.sqrt(2)) < 1e-12]
    # every diagonal around the center touches the blocked square's corner
    assert diagonals == []
    for u, v, _ in g.edges:
        assert _box_distance_sampled(pos[u], pos[v], (1, 1)) >= DEFAULT_RADIUS - 1e-9


@pytest.mark.parametrize("k", [3, 4, 5])
def test_grid_edges_clear_obstacles(k):
    rows = ["........", "..@.....", ".....@..", "........", ".@......", "....@@..", "........", "........"]
    grid = parse_map("type octile\nheight 8\nwidth 8\nmap\n" + "\n".join(rows) + "\n")
    g = build_grid_graph(grid, neighborhood(k), DEFAULT_RADIUS)
    blocked = [(x, y) for y in range(8) for x in range(8) if grid.is_blocked(x, y)]
    for u, v, w in g.edges:
        a, b = g.positions[u], g.positions[v]
        assert w == pytest.approx(math.hypot(b[0] - a[0], b[1] - a[1]), abs=1e-9)
        for cell in blocked:
            assert _box_distance_sampled(a, b, cell) >= DEFAULT_RADIUS - 1e-6


def test_grid_instance_maps_cells():
    inst = grid_instance(GridMap.empty(4, 4), neighborhood(2), [((0, 0), (3, 3)), ((3, 0), (0, 3))])
    assert inst.graph.positions[inst.starts[1]] == (3, 0)
    with pytest.raises(InputError):
        grid_instance(parse_map("type octile\nheight 1\nwidth 2\nmap\n.@\n"), neighborhood(2), [((1, 0), (0, 0))])


# --- roadmaps and instances ----------------------------------------------------------


def test_roadmap_weights():
    g = load_roadmap("2\n0 0 0\n1 3 4\n1\n0 1\n")
    assert g.weight(0, 1) == 5.0 == g.weight(1, 0)
    tri = load_roadmap(f"3\n0 0 0\n1 {math.sqrt(3)!r} 1\n2 {math.sqrt(3)!r} 0\n3\n0 1\n1 2\n2 0\n")
    assert tri.weight(0, 1) == pytest.approx(2)
    assert tri.weight(1, 2) == pytest.approx(1)
    assert tri.weight(2, 0) == pytest.approx(math.sqrt(3))


@pytest.mark.parametrize("text", [
    "2\n0 0 0\n0 1 1\n1\n0 1\n",      # duplicate id
    "2\n0 0 0\n1 1 1\n1\n0 2\n",      # dangling endpoint
    "2\n0 0 0\n1 1 1\n2\n0 1\n",      # missing edge line
    "x\n",
])
def test_roadmap_parse_errors(text):
    with pytest.raises(ParseError):
        load_roadmap(text)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=2, max_size=8, unique=True),
       st.data())
def test_roadmap_round_trip(points, data):
    n = len(points)
    pairs = data.draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    edges = {(min(u, v), max(u, v)) for u, v in pairs if u != v and points[u] != points[v]}
    g = Graph(points, [(u, v, math.dist(points[u], points[v])) for u, v in sorted(edges)])
    back = load_roadmap(dump_roadmap(g))
    assert back.positions == g.positions
    assert sorted(back.edges) == sorted(g.edges)


def test_goal_distances_triangle(triangle):
    d = goal_distances(triangle.graph, 0)
    assert d[0] == 0 and d[2] == pytest.approx(math.sqrt(3)) and d[1] == pytest.approx(2)
    lone = Graph([(0, 0), (1, 0), (5, 5)], [(0, 1, 1.0)])
    assert goal_distances(lone, 0)[2] == math.inf


def test_instance_validation():
    g = Graph([(0, 0), (1, 0), (2, 0)], [(0, 1, 1.0), (1, 2, 1.0)])
    with pytest.raises(InputError):
        Instance(g, [0, 0], [1, 2])
    with pytest.raises(InputError):
        Instance(g, [0, 1], [2, 2])
    with pytest.raises(InputError):
        Instance(g, [0], [1, 2])
    with pytest.raises(InputError):
        Instance(g, [0], [7])
    close = Graph([(0, 0), (0.3, 0)], [(0, 1, 0.3)])
    with pytest.raises(InputError):
        Instance(close, [0], [1])
    assert Instance(g, [0, 2], [2, 0]).subset(1).num_agents == 1


def test_graph_rejects_bad_edges():
    with pytest.raises(InputError):
        Graph([(0, 0), (1, 0)], [(0, 0, 1.0)])
    with pytest.raises(InputError):
        Graph([(0, 0), (1, 0)], [(0, 1, 2.0)])
