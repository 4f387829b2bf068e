"""Constraints, timed paths, conflicts and the conflict count table."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .geometry import INF, MotionSegment, TimeInterval, conflict_interval, conflict_predicate
from .world import Graph


class StalePathError(RuntimeError):
    """The path handed to an incremental update is not the one in the table."""


@dataclass(frozen=True, order=True)
class MoveId:
    """Directed edge traversal ``src -> dst``; ``src == dst`` denotes a wait."""

    src: int
    dst: int

    @property
    def is_wait(self) -> bool:
        return self.src == self.dst


@dataclass(frozen=True)
class Motion:
    """One timed step of a path: a move or a wait at a vertex."""

    move: MoveId
    start: float
    duration: float
    segment: MotionSegment = field(compare=False, repr=False)

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def key(self) -> Tuple[MoveId, float]:
        return (self.move, self.start)


def make_motion(graph: Graph, src: int, dst: int, start: float, duration: Optional[float] = None) -> Motion:
    if duration is None:
        duration = graph.weight(src, dst)
    seg = MotionSegment(graph.positions[src], graph.positions[dst], start, duration)
    return Motion(MoveId(src, dst), start, duration, seg)


@dataclass(frozen=True)
class TimedPath:
    """Motions of one agent from its start at time 0 until arrival at its goal."""

    agent: int
    motions: Tuple[Motion, ...]
    start_vertex: int
    goal_vertex: int

    @property
    def cost(self) -> float:
        return self.motions[-1].end if self.motions else 0.0

    def rest_motion(self, graph: Graph) -> Motion:
        """The implicit infinite wait at the goal after arrival."""
        return make_motion(graph, self.goal_vertex, self.goal_vertex, self.cost, INF)

    def with_rest(self, graph: Graph) -> List[Motion]:
        return list(self.motions) + [self.rest_motion(graph)]

    def presence(self) -> List[Tuple[int, float, float]]:
        """(vertex, arrive, leave) spans; the last one extends to infinity."""
        spans = []
        t, v = 0.0, self.start_vertex
        for m in self.motions:
            if m.move.is_wait:
                continue
            spans.append((v, t, m.start))
            v, t = m.move.dst, m.end
        spans.append((v, t, INF))
        return spans


@dataclass(frozen=True)
class NegativeConstraint:
    """Agent may not start ``move`` in ``blocked``.

    For a wait move ``(v, v)`` the block is on presence: the agent may not be
    located at ``v`` at any time in ``blocked``.
    """

    agent: int
    move: MoveId
    blocked: TimeInterval

    def __post_init__(self) -> None:
        if not self.blocked.hi > self.blocked.lo:
            raise ValueError(f"empty blocked interval {self.blocked}")


@dataclass(frozen=True)
class PositiveConstraint:
    """Agent must start ``move`` at some time inside ``window``."""

    agent: int
    move: MoveId
    window: TimeInterval

    def __post_init__(self) -> None:
        if self.move.is_wait:
            raise ValueError("positive constraints apply to moves only")
        if not self.window.hi > self.window.lo:
            raise ValueError(f"empty landmark window {self.window}")


@dataclass(frozen=True)
class Conflict:
    agent_i: int
    agent_j: int
    motion_i: Motion
    motion_j: Motion
    overlap: TimeInterval

    @property
    def agents(self) -> Tuple[int, int]:
        return (self.agent_i, self.agent_j)


# ---------------------------------------------------------------------------
# constraint checks


def _presence_hits(spans: Sequence[Tuple[int, float, float]], v: int, lo: float, hi: float) -> bool:
    for u, a, d in spans:
        if u == v and a < hi and d >= lo:
            return True
    return False


def constraints_satisfied(path: TimedPath, negatives: Iterable[NegativeConstraint],
                          positives: Iterable[PositiveConstraint] = ()) -> bool:
    spans = None
    for c in negatives:
        if c.agent != path.agent:
            continue
        if c.move.is_wait:
            if spans is None:
                spans = path.presence()
            if _presence_hits(spans, c.move.src, c.blocked.lo, c.blocked.hi):
                return False
        else:
            for m in path.motions:
                if m.move == c.move and c.blocked.lo <= m.start < c.blocked.hi:
                    return False
    for c in positives:
        if c.agent != path.agent:
            continue
        if not any(m.move == c.move and c.window.lo <= m.start < c.window.hi for m in path.motions):
            return False
    return True


# ---------------------------------------------------------------------------
# path-vs-path conflict scan


def _bbox_gap(a: MotionSegment, b: MotionSegment) -> float:
    (ax0, ay0), (ax1, ay1) = a.src, a.dst
    (bx0, by0), (bx1, by1) = b.src, b.dst
    gap = max(min(bx0, bx1) - max(ax0, ax1), min(ax0, ax1) - max(bx0, bx1),
              min(by0, by1) - max(ay0, ay1), min(ay0, ay1) - max(by0, by1))
    return gap if gap > 0.0 else 0.0


def motions_conflict(a: Motion, b: Motion, shape_sum: float) -> bool:
    if _bbox_gap(a.segment, b.segment) >= shape_sum:
        return False
    return conflict_predicate(a.segment, b.segment, shape_sum)


def conflicting_pairs(ma: Sequence[Motion], mb: Sequence[Motion], shape_sum: float) -> List[Tuple[int, int]]:
    """Index pairs of conflicting motions; both lists are sorted by time."""
    out = []
    j0 = 0
    for i, a in enumerate(ma):
        while j0 < len(mb) and mb[j0].end <= a.start:
            j0 += 1
        j = j0
        while j < len(mb) and mb[j].start < a.end:
            if motions_conflict(a, mb[j], shape_sum):
                out.append((i, j))
            j += 1
    return out


def path_conflicts(pa: TimedPath, pb: TimedPath, graph: Graph, shape_sum: float) -> List[Conflict]:
    ma, mb = pa.with_rest(graph), pb.with_rest(graph)
    out = []
    for i, j in conflicting_pairs(ma, mb, shape_sum):
        iv = conflict_interval(ma[i].segment, mb[j].segment, shape_sum)
        if iv is not None:
            out.append(Conflict(pa.agent, pb.agent, ma[i], mb[j], iv))
    return out


# ---------------------------------------------------------------------------
# conflict count table

MotionKey = Tuple[int, MoveId, float]


class ConflictCountTable:
    """Index of every conflicting motion pair among the current paths.

    Entries are keyed by (agent, move, start time); each conflict is listed
    under both endpoints.
    """

    def __init__(self, graph: Graph, shape_sum: float):
        self.graph = graph
        self.shape_sum = shape_sum
        self.entries: Dict[MotionKey, Set[MotionKey]] = {}
        self.paths: Dict[int, TimedPath] = {}
        self._motions: Dict[int, List[Motion]] = {}

    @classmethod
    def rebuild(cls, paths: Sequence[TimedPath], graph: Graph, shape_sum: float) -> "ConflictCountTable":
        table = cls(graph, shape_sum)
        for p in paths:
            table.paths[p.agent] = p
            table._motions[p.agent] = p.with_rest(graph)
        agents = sorted(table.paths)
        for x, a in enumerate(agents):
            for b in agents[x + 1:]:
                table._link(a, b)
        return table

    def copy(self) -> "ConflictCountTable":
        other = ConflictCountTable(self.graph, self.shape_sum)
        other.entries = {k: set(v) for k, v in self.entries.items()}
        other.paths = dict(self.paths)
        other._motions = dict(self._motions)
        return other

    def _link(self, a: int, b: int) -> None:
        ma, mb = self._motions[a], self._motions[b]
        for i, j in conflicting_pairs(ma, mb, self.shape_sum):
            ka = (a, ma[i].move, ma[i].start)
            kb = (b, mb[j].move, mb[j].start)
            self.entries.setdefault(ka, set()).add(kb)
            self.entries.setdefault(kb, set()).add(ka)

    def _unlink(self, a: int) -> None:
        for m in self._motions[a]:
            ka = (a, m.move, m.start)
            for kb in self.entries.pop(ka, ()):
                peers = self.entries.get(kb)
                if peers is not None:
                    peers.discard(ka)
                    if not peers:
                        del self.entries[kb]

    def replace_path(self, agent: int, old_path: TimedPath, new_path: TimedPath) -> None:
        if self.paths.get(agent) != old_path:
            raise StalePathError(f"agent {agent}: old path is not the one in the table")
        self._unlink(agent)
        self.paths[agent] = new_path
        self._motions[agent] = new_path.with_rest(self.graph)
        for other in self.paths:
            if other != agent:
                self._link(agent, other)

    def conflicts_of(self, agent: int, move: MoveId, start: float) -> Set[MotionKey]:
        return self.entries.get((agent, move, start), set())

    def agent_total(self, agent: int) -> int:
        return sum(len(v) for k, v in self.entries.items() if k[0] == agent)

    @property
    def total(self) -> int:
        """Number of conflicting motion pairs."""
        return sum(len(v) for v in self.entries.values()) // 2

    def as_pairs(self) -> Set[Tuple[MotionKey, MotionKey]]:
        return {(k, o) for k, v in self.entries.items() for o in v}


def count_conflicts_against(path: TimedPath, others: Iterable[TimedPath], graph: Graph, shape_sum: float) -> int:
    mine = path.with_rest(graph)
    total = 0
    for o in others:
        if o.agent != path.agent:
            total += len(conflicting_pairs(mine, o.with_rest(graph), shape_sum))
    return total
