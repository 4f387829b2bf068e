"""Problem instances: grid maps with 2^k neighborhoods, roadmaps and scenarios."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .geometry import DEFAULT_RADIUS, EPS_GEOM, Point2, segment_box_distance

PASSABLE = frozenset(".G")
BLOCKED = frozenset("@OTSW")


class ParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class InputError(ValueError):
    pass


class Graph:
    """Undirected weighted metric graph; waits are implicit."""

    def __init__(self, positions: Sequence[Tuple[float, float]], edges: Iterable[Tuple[int, int, float]]):
        self.positions: List[Point2] = [Point2(float(x), float(y)) for x, y in positions]
        n = len(self.positions)
        self.adjacency: List[List[Tuple[int, float]]] = [[] for _ in range(n)]
        self.edges: List[Tuple[int, int, float]] = []
        seen = set()
        for u, v, w in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) references a missing vertex")
            if u == v:
                raise InputError(f"self-loop at vertex {u}")
            if not (w > 0 and math.isfinite(w)):
                raise InputError(f"edge ({u}, {v}) has non-positive weight {w}")
            length = math.dist(self.positions[u], self.positions[v])
            if abs(w - length) > 1e-9 * max(1.0, length):
                raise InputError(f"edge ({u}, {v}) weight {w} differs from its length {length}")
            key = (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            self.edges.append((u, v, float(w)))
            self.adjacency[u].append((v, float(w)))
            self.adjacency[v].append((u, float(w)))
        self._weights: Dict[Tuple[int, int], float] = {}
        for u, v, w in self.edges:
            self._weights[(u, v)] = w
            self._weights[(v, u)] = w
        self.max_edge_length = max((w for _, _, w in self.edges), default=0.0)
        self._buckets: Optional[Dict[Tuple[int, int], List[int]]] = None
        self._bucket_size = 1.0

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def mean_degree(self) -> float:
        return 2.0 * len(self.edges) / len(self.positions) if self.positions else 0.0

    def weight(self, u: int, v: int) -> float:
        return self._weights[(u, v)]

    def has_edge(self, u: int, v: int) -> bool:
        return (u, v) in self._weights

    def vertices_near_box(self, lo: Tuple[float, float], hi: Tuple[float, float]) -> List[int]:
        """Vertices whose position lies inside the axis-aligned box [lo, hi]."""
        if self._buckets is None:
            self._bucket_size = max(1.0, self.max_edge_length)
            self._buckets = {}
            for i, (x, y) in enumerate(self.positions):
                key = (math.floor(x / self._bucket_size), math.floor(y / self._bucket_size))
                self._buckets.setdefault(key, []).append(i)
        s = self._bucket_size
        out = []
        for bx in range(math.floor(lo[0] / s), math.floor(hi[0] / s) + 1):
            for by in range(math.floor(lo[1] / s), math.floor(hi[1] / s) + 1):
                for i in self._buckets.get((bx, by), ()):
                    x, y = self.positions[i]
                    if lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]:
                        out.append(i)
        out.sort()
        return out

    def has_close_pair(self, threshold: float) -> bool:
        """True if two distinct vertices lie closer than ``threshold``."""
        if threshold <= 0 or len(self.positions) < 2:
            return False
        cells: Dict[Tuple[int, int], List[int]] = {}
        for i, (x, y) in enumerate(self.positions):
            cells.setdefault((math.floor(x / threshold), math.floor(y / threshold)), []).append(i)
        for (cx, cy), members in cells.items():
            for dx in (-1, 0, 1):
                for dy in (-1, 0, 1):
                    for j in cells.get((cx + dx, cy + dy), ()):
                        for i in members:
                            if i < j:
                                p, q = self.positions[i], self.positions[j]
                                if math.hypot(p[0] - q[0], p[1] - q[1]) < threshold:
                                    return True
        return False


@dataclass(frozen=True)
class GridMap:
    width: int
    height: int
    blocked: Tuple[Tuple[bool, ...], ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise InputError("map dimensions must be positive")

    def is_blocked(self, x: int, y: int) -> bool:
        return self.blocked[y][x]

    def in_bounds(self, x: int, y: int) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height

    def passable(self, x: int, y: int) -> bool:
        return self.in_bounds(x, y) and not self.blocked[y][x]

    @property
    def blocked_count(self) -> int:
        return sum(sum(row) for row in self.blocked)

    @classmethod
    def empty(cls, width: int, height: int, name: str = "") -> "GridMap":
        return cls(width, height, tuple(tuple(False for _ in range(width)) for _ in range(height)), name)

    def to_text(self) -> str:
        rows = ["".join("@" if b else "." for b in row) for row in self.blocked]
        return f"type octile\nheight {self.height}\nwidth {self.width}\nmap\n" + "\n".join(rows) + "\n"


@dataclass(frozen=True)
class NeighborhoodSpec:
    k_exponent: int
    offsets: Tuple[Tuple[int, int], ...]

    @property
    def size(self) -> int:
        return len(self.offsets)


@dataclass
class Instance:
    graph: Graph
    starts: List[int]
    goals: List[int]
    radius: float = DEFAULT_RADIUS
    name: str = ""
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(self.starts) != len(self.goals):
            raise InputError("starts and goals differ in length")
        if len(set(self.starts)) != len(self.starts):
            raise InputError("start vertices must be pairwise distinct")
        if len(set(self.goals)) != len(self.goals):
            raise InputError("goal vertices must be pairwise distinct")
        n = len(self.graph)
        for v in list(self.starts) + list(self.goals):
            if not 0 <= v < n:
                raise InputError(f"vertex {v} not in graph")
        if not self.radius > 0:
            raise InputError("radius must be positive")
        # two agents parked on vertices closer than a diameter always collide;
        # the constraint vocabulary assumes this never happens
        if self.graph.has_close_pair(self.shape_sum - EPS_GEOM):
            raise InputError("graph has vertices closer than one agent diameter")

    @property
    def num_agents(self) -> int:
        return len(self.starts)

    @property
    def shape_sum(self) -> float:
        return 2.0 * self.radius

    def subset(self, k: int) -> "Instance":
        return Instance(self.graph, self.starts[:k], self.goals[:k], self.radius, self.name, dict(self.meta))


# ---------------------------------------------------------------------------
# MovingAI formats


def parse_map(text: str, name: str = "") -> GridMap:
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    header: Dict[str, str] = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        if line == "map":
            break
        parts = line.split()
        if len(parts) != 2 or parts[0] not in ("type", "height", "width"):
            raise ParseError(f"malformed header line {line!r}", i)
        header[parts[0]] = parts[1]
    else:
        raise ParseError("missing 'map' line", i)
    for key in ("type", "height", "width"):
        if key not in header:
            raise ParseError(f"missing '{key}' header", i)
    try:
        height, width = int(header["height"]), int(header["width"])
    except ValueError as exc:
        raise ParseError("non-integer map dimensions", i) from exc
    rows = []
    for r in range(height):
        if i + r >= len(lines):
            raise ParseError(f"expected {height} rows, found {r}", i + r + 1)
        row = lines[i + r].rstrip("\n")
        if len(row) != width:
            raise ParseError(f"row length {len(row)} != width {width}", i + r + 1)
        cells = []
        for glyph in row:
            if glyph in PASSABLE:
                cells.append(False)
            elif glyph in BLOCKED:
                cells.append(True)
            else:
                raise ParseError(f"unknown glyph {glyph!r}", i + r + 1)
        rows.append(tuple(cells))
    return GridMap(width, height, tuple(rows), name)


def parse_scen(text: str) -> List[Tuple[Tuple[int, int], Tuple[int, int]]]:
    lines = text.replace("\r\n", "\n").split("\n")
    if not lines or not lines[0].strip().startswith("version"):
        raise ParseError("missing version header", 1)
    if lines[0].split()[1:] not in (["1"], ["1.0"]):
        raise ParseError(f"unsupported scenario version {lines[0].strip()!r}", 1)
    agents = []
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t") if "\t" in line else line.split()
        if len(parts) < 9:
            raise ParseError("expected 9 fields", n)
        try:
            w, h = int(parts[2]), int(parts[3])
            sx, sy, gx, gy = (int(p) for p in parts[4:8])
        except ValueError as exc:
            raise ParseError("non-integer field", n) from exc
        for x, y in ((sx, sy), (gx, gy)):
            if not (0 <= x < w and 0 <= y < h):
                raise ParseError(f"coordinate ({x}, {y}) outside {w}x{h}", n)
        agents.append(((sx, sy), (gx, gy)))
    return agents


# ---------------------------------------------------------------------------
# 2^k neighborhoods


def neighborhood(k_exponent: int) -> NeighborhoodSpec:
    if k_exponent not in (2, 3, 4, 5):
        raise InputError(f"unsupported neighborhood exponent {k_exponent}")
    ring = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    for _ in range(k_exponent - 2):
        nxt = []
        for idx, (a, b) in enumerate(ring):
            c, d = ring[(idx + 1) % len(ring)]
            nxt.append((a, b))
            nxt.append((a + c, b + d))
        ring = nxt
    return NeighborhoodSpec(k_exponent, tuple(ring))


def neighborhood_from_size(size: int) -> NeighborhoodSpec:
    sizes = {4: 2, 8: 3, 16: 4, 32: 5}
    if size not in sizes:
        raise InputError(f"neighborhood must be one of 4, 8, 16, 32; got {size}")
    return neighborhood(sizes[size])


class GridGraph(Graph):
    """Graph over a grid map keeping the cell <-> vertex mapping."""

    def __init__(self, grid: GridMap, spec: NeighborhoodSpec, radius: float):
        self.grid = grid
        self.spec = spec
        self.radius = radius
        self.cell_to_vertex: Dict[Tuple[int, int], int] = {}
        cells = []
        for y in range(grid.height):
            for x in range(grid.width):
                if not grid.blocked[y][x]:
                    self.cell_to_vertex[(x, y)] = len(cells)
                    cells.append((x, y))
        edges = []
        half = [(dx, dy) for dx, dy in spec.offsets if dx > 0 or (dx == 0 and dy > 0)]
        for (x, y), u in self.cell_to_vertex.items():
            for dx, dy in half:
                v = self.cell_to_vertex.get((x + dx, y + dy))
                if v is None:
                    continue
                if _edge_clear(grid, (x, y), (x + dx, y + dy), radius):
                    edges.append((u, v, math.hypot(dx, dy)))
        super().__init__(cells, edges)

    def vertex(self, cell: Tuple[int, int]) -> int:
        try:
            return self.cell_to_vertex[cell]
        except KeyError:
            raise InputError(f"cell {cell} is blocked or outside the map") from None


def _edge_clear(grid: GridMap, a: Tuple[int, int], b: Tuple[int, int], radius: float) -> bool:
    pa, pb = Point2(*a), Point2(*b)
    reach = radius + 0.5
    x0 = max(0, math.floor(min(a[0], b[0]) - reach))
    x1 = min(grid.width - 1, math.ceil(max(a[0], b[0]) + reach))
    y0 = max(0, math.floor(min(a[1], b[1]) - reach))
    y1 = min(grid.height - 1, math.ceil(max(a[1], b[1]) + reach))
    for cy in range(y0, y1 + 1):
        row = grid.blocked[cy]
        for cx in range(x0, x1 + 1):
            if row[cx]:
                d = segment_box_distance(pa, pb, Point2(cx - 0.5, cy - 0.5), Point2(cx + 0.5, cy + 0.5))
                if d < radius - EPS_GEOM:
                    return False
    return True


def build_grid_graph(grid: GridMap, spec: NeighborhoodSpec, radius: float = DEFAULT_RADIUS) -> GridGraph:
    return GridGraph(grid, spec, radius)


def grid_instance(grid: GridMap, spec: NeighborhoodSpec, pairs: Sequence[Tuple[Tuple[int, int], Tuple[int, int]]],
                  radius: float = DEFAULT_RADIUS, name: str = "") -> Instance:
    graph = build_grid_graph(grid, spec, radius)
    starts = [graph.vertex(s) for s, _ in pairs]
    goals = [graph.vertex(g) for _, g in pairs]
    return Instance(graph, starts, goals, radius, name or grid.name, {"neighborhood": spec.size})


# ---------------------------------------------------------------------------
# roadmaps


def load_roadmap(text: str) -> Graph:
    lines = [(n, ln.strip()) for n, ln in enumerate(text.replace("\r\n", "\n").split("\n"), start=1)]
    lines = [(n, ln) for n, ln in lines if ln and not ln.startswith("#")]
    pos = 0

    def take() -> Tuple[int, str]:
        nonlocal pos
        if pos >= len(lines):
            raise ParseError("unexpected end of roadmap", lines[-1][0] if lines else 1)
        item = lines[pos]
        pos += 1
        return item

    n, line = take()
    try:
        nv = int(line)
    except ValueError as exc:
        raise ParseError("expected vertex count", n) from exc
    coords: Dict[int, Tuple[float, float]] = {}
    for _ in range(nv):
        n, line = take()
        parts = line.split()
        if len(parts) != 3:
            raise ParseError("expected 'id x y'", n)
        try:
            vid, x, y = int(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError("malformed vertex line", n) from exc
        if vid in coords:
            raise ParseError(f"duplicate vertex id {vid}", n)
        if not 0 <= vid < nv:
            raise ParseError(f"vertex id {vid} outside 0..{nv - 1}", n)
        coords[vid] = (x, y)
    n, line = take()
    try:
        ne = int(line)
    except ValueError as exc:
        raise ParseError("expected edge count", n) from exc
    edges = []
    for _ in range(ne):
        n, line = take()
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected 'u v'", n)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise ParseError("malformed edge line", n) from exc
        if u not in coords or v not in coords:
            raise ParseError(f"dangling edge endpoint in ({u}, {v})", n)
        (x0, y0), (x1, y1) = coords[u], coords[v]
        edges.append((u, v, math.hypot(x1 - x0, y1 - y0)))
    return Graph([coords[i] for i in range(nv)], edges)


def dump_roadmap(graph: Graph) -> str:
    out = [str(len(graph))]
    out.extend(f"{i} {x!r} {y!r}" for i, (x, y) in enumerate(graph.positions))
    out.append(str(graph.num_edges))
    out.extend(f"{u} {v}" for u, v, _ in graph.edges)
    return "\n".join(out) + "\n"


def goal_distances(graph: Graph, goal: int) -> List[float]:
    dist = [math.inf] * len(graph)
    dist[goal] = 0.0
    heap = [(0.0, goal)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in graph.adjacency[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


__all__ = [
    "Graph", "GridGraph", "GridMap", "Instance", "InputError", "NeighborhoodSpec", "ParseError",
    "build_grid_graph", "dump_roadmap", "goal_distances", "grid_instance", "load_roadmap", "neighborhood",
    "neighborhood_from_size", "parse_map", "parse_scen",
]
