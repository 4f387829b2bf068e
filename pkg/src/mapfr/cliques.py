"""Conflict graphs and the multi-constraint split generators.

Every motion taking part in a split is described by one time variable: the
start time for a move, or a time at which the agent is present at a vertex
for a wait.  Two motions conflict exactly when the difference of their
variables lies in an open offset range ``(dlo, dhi)``; the range is a single
interval because the set of conflicting relative placements is convex.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .constraints import ConflictCountTable, MoveId, NegativeConstraint, PositiveConstraint
from .geometry import (EPS_TIME, INF, MotionSegment, TimeInterval, segment_segment_distance,
                       start_time_conflicts, stationary_sweep)
from .world import Graph

Offsets = Tuple[float, float]


class OffsetTable:
    """Memoised conflicting offset ranges between pairs of moves on one graph."""

    def __init__(self, graph: Graph, shape_sum: float):
        self.graph = graph
        self.shape_sum = shape_sum
        self._cache: Dict[Tuple[MoveId, MoveId], Optional[Offsets]] = {}

    def duration(self, move: MoveId) -> float:
        return 0.0 if move.is_wait else self.graph.weight(move.src, move.dst)

    def offsets(self, a: MoveId, b: MoveId) -> Optional[Offsets]:
        """Range of ``var(b) - var(a)`` for which the two motions conflict."""
        key = (a, b)
        if key not in self._cache:
            self._cache[key] = self._compute(a, b)
        return self._cache[key]

    def _compute(self, a: MoveId, b: MoveId) -> Optional[Offsets]:
        pos = self.graph.positions
        pa0, pa1, pb0, pb1 = pos[a.src], pos[a.dst], pos[b.src], pos[b.dst]
        if segment_segment_distance(pa0, pa1, pb0, pb1) >= self.shape_sum:
            return None
        if a.is_wait and b.is_wait:
            return None
        if b.is_wait:
            return stationary_sweep(pb0, pa0, pa1, self.duration(a), self.shape_sum)
        if a.is_wait:
            sweep = stationary_sweep(pa0, pb0, pb1, self.duration(b), self.shape_sum)
            return None if sweep is None else (-sweep[1], -sweep[0])
        fixed = MotionSegment(pa0, pa1, 0.0, self.duration(a))
        found = start_time_conflicts(fixed, pb0, pb1, self.duration(b), self.shape_sum)
        if found is None:
            return None
        return found[1], found[3]


@dataclass(frozen=True)
class AnnotatedVertex:
    agent: int
    move: MoveId
    unsafe: TimeInterval


@dataclass
class ConflictGraph:
    """Interval-annotated multipartite conflict graph.

    ``vertices`` are indexed globally; ``partition[i]`` names the side of
    vertex ``i`` and ``edges`` maps index pairs to annotations.
    """

    vertices: List[AnnotatedVertex] = field(default_factory=list)
    partition: List[int] = field(default_factory=list)
    edges: Dict[Tuple[int, int], TimeInterval] = field(default_factory=dict)

    def add_vertex(self, vertex: AnnotatedVertex, side: int) -> int:
        self.vertices.append(vertex)
        self.partition.append(side)
        return len(self.vertices) - 1

    def add_edge(self, u: int, v: int, iv: TimeInterval) -> None:
        if self.partition[u] == self.partition[v]:
            raise ValueError("edges must join different partitions")
        if not iv.hi > iv.lo:
            raise ValueError("edge annotation must be nonempty")
        self.edges[(u, v)] = iv
        self.edges[(v, u)] = iv

    def edge(self, u: int, v: int) -> Optional[TimeInterval]:
        return self.edges.get((u, v))

    def side(self, s: int) -> List[int]:
        return [i for i, p in enumerate(self.partition) if p == s]


def _covers(outer: Optional[TimeInterval], inner: TimeInterval) -> bool:
    return outer is not None and outer.lo <= inner.lo + EPS_TIME and outer.hi >= inner.hi - EPS_TIME


def superset_members(core_pair: Tuple[int, int], bcg: ConflictGraph) -> Tuple[List[int], List[int]]:
    """Vertices of the biclique grown from the core edge by the superset rule.

    A vertex joins when its annotation towards the opposite core vertex
    contains the core annotation.  Cross pairs of joined vertices must also
    satisfy the rule; when they do not, the larger side is kept whole and the
    other side is filtered.
    """
    u, v = core_pair
    core = bcg.edge(u, v)
    if core is None:
        raise ValueError("core pair is not an edge of the conflict graph")
    left = [x for x in bcg.side(bcg.partition[u]) if x != u and _covers(bcg.edge(x, v), core)]
    right = [w for w in bcg.side(bcg.partition[v]) if w != v and _covers(bcg.edge(u, w), core)]
    if len(right) >= len(left):
        left = [x for x in left if all(_covers(bcg.edge(x, w), core) for w in right)]
    else:
        right = [w for w in right if all(_covers(bcg.edge(x, w), core) for x in left)]
    return [u] + left, [v] + right


def superset_biclique(core_pair: Tuple[int, int], bcg: ConflictGraph
                      ) -> Tuple[List[NegativeConstraint], List[NegativeConstraint]]:
    """Negative sets for both children, each blocked over the core annotation."""
    left, right = superset_members(core_pair, bcg)
    core = bcg.edge(*core_pair)
    c_i = [NegativeConstraint(bcg.vertices[x].agent, bcg.vertices[x].move, core) for x in left]
    c_j = [NegativeConstraint(bcg.vertices[w].agent, bcg.vertices[w].move, core) for w in right]
    return c_i, c_j


# ---------------------------------------------------------------------------
# split geometry


@dataclass(frozen=True)
class CoreSide:
    agent: int
    move: MoveId
    var: float          # start time of a move or a presence time of a wait
    window: TimeInterval


@dataclass(frozen=True)
class CorePair:
    i: CoreSide
    j: CoreSide
    offsets: Offsets    # conflicting var(j) - var(i)


def core_pair(conflict, offsets: OffsetTable) -> Optional[CorePair]:
    """Variables and disjoint-completing windows for a conflicting motion pair."""
    mi, mj = conflict.motion_i, conflict.motion_j
    d = offsets.offsets(mi.move, mj.move)
    if d is None:
        return None
    dlo, dhi = d
    if mi.move.is_wait:
        vi = _presence_anchor(mi.end, mj.start - dhi, mj.start - dlo)
        vj = mj.start
    elif mj.move.is_wait:
        vi = mi.start
        vj = _presence_anchor(mj.end, mi.start + dlo, mi.start + dhi)
    else:
        vi, vj = mi.start, mj.start
    delta = vj - vi
    if not dlo < delta < dhi:
        return None
    wi = TimeInterval(vi, _after(vi, delta - dlo))
    wj = TimeInterval(vj, _after(vj, dhi - delta))
    return CorePair(CoreSide(conflict.agent_i, mi.move, vi, wi), CoreSide(conflict.agent_j, mj.move, vj, wj), d)


def _after(t: float, span: float) -> float:
    """``t + span`` kept strictly above ``t`` despite rounding."""
    return max(t + span, math.nextafter(t, INF))


def _presence_anchor(leave: float, sweep_lo: float, sweep_hi: float) -> float:
    """Split point for a stay that overlaps a sweep ``(sweep_lo, sweep_hi)``.

    Anchoring at the departure time gives the mover its full delay; when the
    stay outlasts the middle of the sweep, both sides get half the sweep.
    Either way each child moves by a finite amount, so repeated splits on the
    same pair cannot shrink geometrically.
    """
    return min(leave, 0.5 * (sweep_lo + sweep_hi))


def plain_sets(core: CorePair) -> Tuple[NegativeConstraint, NegativeConstraint]:
    return (NegativeConstraint(core.i.agent, core.i.move, core.i.window),
            NegativeConstraint(core.j.agent, core.j.move, core.j.window))


def forced_window(ref: TimeInterval, d: Offsets) -> Optional[TimeInterval]:
    """Values of a partner variable that conflict with every reference value in ``ref``."""
    lo, hi = ref.hi + d[0], ref.lo + d[1]
    lo = max(lo, 0.0)
    if not hi > lo + EPS_TIME:
        return None
    return TimeInterval(lo, hi)


def enumerate_conflicting_moves(core_agent_move: MoveId, opponent: int, graph: Graph,
                                offsets: OffsetTable) -> List[Tuple[MoveId, Offsets]]:
    """Moves and waits of ``opponent`` that can conflict with the core move at some offset."""
    pos = graph.positions
    a, b = pos[core_agent_move.src], pos[core_agent_move.dst]
    reach = offsets.shape_sum + graph.max_edge_length
    lo = (min(a[0], b[0]) - reach, min(a[1], b[1]) - reach)
    hi = (max(a[0], b[0]) + reach, max(a[1], b[1]) + reach)
    out = []
    for u in graph.vertices_near_box(lo, hi):
        for w in [u] + sorted(x for x, _ in graph.adjacency[u]):
            m = MoveId(u, w)
            d = offsets.offsets(core_agent_move, m)
            if d is not None:
                out.append((m, d))
    return out


def star(side: CoreSide, agent: int, graph: Graph, offsets: OffsetTable) -> List[NegativeConstraint]:
    """Negatives for ``agent``'s motions that conflict with ``side`` over its whole window."""
    out = []
    for m, d in enumerate_conflicting_moves(side.move, agent, graph, offsets):
        win = forced_window(side.window, d)
        if win is not None:
            out.append(NegativeConstraint(agent, m, win))
    return out


@dataclass
class DisjointSplit:
    """Two-child split: child A carries the landmark, child B the mirror negative."""

    positive: PositiveConstraint
    negatives: List[NegativeConstraint]
    mirror: NegativeConstraint


def _ensure_core(negs: List[NegativeConstraint], core: CoreSide) -> List[NegativeConstraint]:
    """Put the core negative first, replacing a star entry on the same move."""
    mine = NegativeConstraint(core.agent, core.move, core.window)
    rest = [n for n in negs if not (n.agent == core.agent and n.move == core.move)]
    return [mine] + rest


def ds_split(core: CorePair, positive_side: str) -> DisjointSplit:
    p, q = (core.i, core.j) if positive_side == "i" else (core.j, core.i)
    return DisjointSplit(PositiveConstraint(p.agent, p.move, p.window),
                         [NegativeConstraint(q.agent, q.move, q.window)],
                         NegativeConstraint(p.agent, p.move, p.window))


def db_split(core: CorePair, graph: Graph, offsets: OffsetTable,
             chooser: Optional[Callable[[CorePair, int, int], str]] = None) -> DisjointSplit:
    """Disjoint split whose positive child blocks the whole star of the opponent."""
    stars = {}
    for name, p, q in (("i", core.i, core.j), ("j", core.j, core.i)):
        stars[name] = [] if p.move.is_wait else _ensure_core(star(p, q.agent, graph, offsets), q)
    if chooser is not None:
        pick = chooser(core, len(stars["i"]), len(stars["j"]))
    else:
        pick = _pick_larger(core, len(stars["i"]), len(stars["j"]))
    p = core.i if pick == "i" else core.j
    return DisjointSplit(PositiveConstraint(p.agent, p.move, p.window), stars[pick],
                         NegativeConstraint(p.agent, p.move, p.window))


def _pick_larger(core: CorePair, size_i: float, size_j: float) -> str:
    if core.i.move.is_wait:
        return "j"
    if core.j.move.is_wait:
        return "i"
    if size_i != size_j:
        return "i" if size_i > size_j else "j"
    return "i" if core.i.agent < core.j.agent else "j"


def kcg_size(negs: Sequence[NegativeConstraint], metric: str) -> float:
    if metric == "count":
        return float(len(negs))
    lengths = [n.blocked.length for n in negs]
    if metric == "cumulative":
        return sum(lengths)
    if metric == "mean":
        return sum(lengths) / len(lengths) if lengths else 0.0
    raise ValueError(f"unknown clique size metric {metric!r}")


def dk_split(core: CorePair, cct: ConflictCountTable, graph: Graph, offsets: OffsetTable,
             metric: str = "count") -> DisjointSplit:
    """Disjoint split whose positive child blocks conflicting motions of every agent
    that the conflict count table links to the positive motion."""
    kcgs = {}
    for name, p, q in (("i", core.i, core.j), ("j", core.j, core.i)):
        if p.move.is_wait:
            kcgs[name] = []
            continue
        agents = {q.agent}
        for m in cct.paths[p.agent].motions:
            if m.move == p.move and m.start <= p.var < m.end + EPS_TIME:
                agents.update(k[0] for k in cct.conflicts_of(p.agent, m.move, m.start))
        agents.discard(p.agent)
        negs = []
        for k in sorted(agents):
            negs.extend(star(p, k, graph, offsets))
        kcgs[name] = _ensure_core(negs, q)
    pick = _pick_larger(core, kcg_size(kcgs["i"], metric), kcg_size(kcgs["j"], metric))
    p = core.i if pick == "i" else core.j
    return DisjointSplit(PositiveConstraint(p.agent, p.move, p.window), kcgs[pick],
                         NegativeConstraint(p.agent, p.move, p.window))


def bc_split(core: CorePair, graph: Graph, offsets: OffsetTable
             ) -> Tuple[List[NegativeConstraint], List[NegativeConstraint]]:
    """Mutually disjunctive negative sets grown from the core pair by the superset rule.

    Annotations are offset ranges, so containment of the core range means
    the motion conflicts with the opposing core for every pair of values in
    the core windows.  Each member is blocked over its own side's core window.
    """
    bcg = ConflictGraph()
    u = bcg.add_vertex(AnnotatedVertex(core.i.agent, core.i.move, core.i.window), 0)
    v = bcg.add_vertex(AnnotatedVertex(core.j.agent, core.j.move, core.j.window), 1)
    bcg.add_edge(u, v, TimeInterval(*core.offsets))
    for m, d in enumerate_conflicting_moves(core.i.move, core.j.agent, graph, offsets):
        if m != core.j.move:
            w = bcg.add_vertex(AnnotatedVertex(core.j.agent, m, core.j.window), 1)
            bcg.add_edge(u, w, TimeInterval(*d))
    for m, _ in enumerate_conflicting_moves(core.j.move, core.i.agent, graph, offsets):
        if m == core.i.move:
            continue
        d = offsets.offsets(m, core.j.move)
        if d is not None:
            x = bcg.add_vertex(AnnotatedVertex(core.i.agent, m, core.i.window), 0)
            bcg.add_edge(x, v, TimeInterval(*d))
    core_iv = TimeInterval(*core.offsets)
    lefts = [x for x in bcg.side(0) if x != u and _covers(bcg.edge(x, v), core_iv)]
    rights = [w for w in bcg.side(1) if w != v and _covers(bcg.edge(u, w), core_iv)]
    for x in lefts:
        for w in rights:
            d = offsets.offsets(bcg.vertices[x].move, bcg.vertices[w].move)
            if d is not None and d[1] > d[0]:
                bcg.add_edge(x, w, TimeInterval(*d))
    left, right = superset_members((u, v), bcg)
    c_i = [NegativeConstraint(core.i.agent, bcg.vertices[x].move, core.i.window) for x in left]
    c_j = [NegativeConstraint(core.j.agent, bcg.vertices[w].move, core.j.window) for w in right]
    return c_i, c_j


__all__ = [
    "AnnotatedVertex", "ConflictGraph", "CorePair", "CoreSide", "DisjointSplit", "OffsetTable",
    "bc_split", "core_pair", "db_split", "dk_split", "ds_split", "enumerate_conflicting_moves",
    "forced_window", "kcg_size", "plain_sets", "star", "superset_biclique", "superset_members",
]
