"""Safe-interval path planning with time-range constraints and landmarks."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .constraints import Motion, NegativeConstraint, PositiveConstraint, TimedPath, make_motion
from .geometry import EPS_TIME, INF
from .world import Instance, goal_distances

Interval = Tuple[float, float]
FREE: Tuple[Interval, ...] = ((0.0, INF),)


def merge_blocks(blocks: Iterable[Interval]) -> List[Interval]:
    out: List[List[float]] = []
    for lo, hi in sorted(blocks):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return [(a, b) for a, b in out]


def complement(blocks: Iterable[Interval]) -> Tuple[Interval, ...]:
    """Safe intervals of [0, inf) left over by half-open blocks."""
    safe = []
    t = 0.0
    for lo, hi in merge_blocks(blocks):
        if hi <= 0:
            continue
        if lo > t:
            safe.append((t, lo))
        t = max(t, hi)
    if t < INF:
        safe.append((t, INF))
    return tuple(safe)


@dataclass
class SafeIntervalTable:
    """Safe presence intervals per vertex and safe start intervals per move (keyed by ``(src, dst)``)."""

    vertex_safe: Dict[int, Tuple[Interval, ...]] = field(default_factory=dict)
    move_safe: Dict[Tuple[int, int], Tuple[Interval, ...]] = field(default_factory=dict)

    def vertex(self, v: int) -> Tuple[Interval, ...]:
        return self.vertex_safe.get(v, FREE)

    def move(self, u: int, w: int) -> Tuple[Interval, ...]:
        return self.move_safe.get((u, w), FREE)


def build_safe_intervals(agent: int, negatives: Iterable[NegativeConstraint]) -> SafeIntervalTable:
    vblocks: Dict[int, List[Interval]] = {}
    mblocks: Dict[Tuple[int, int], List[Interval]] = {}
    for c in negatives:
        if c.agent != agent:
            continue
        src, dst = c.move.src, c.move.dst
        if src == dst:
            vblocks.setdefault(src, []).append((c.blocked.lo, c.blocked.hi))
        else:
            mblocks.setdefault((src, dst), []).append((c.blocked.lo, c.blocked.hi))
    return SafeIntervalTable(
        {v: complement(b) for v, b in vblocks.items()},
        {m: complement(b) for m, b in mblocks.items()},
    )


def earliest_safe(safe: Sequence[Interval], t: float) -> Optional[float]:
    """Smallest time >= t inside one of the sorted half-open intervals."""
    for lo, hi in safe:
        if hi > t:
            return max(lo, t)
    return None


@dataclass
class PlanStats:
    expansions: int = 0
    generated: int = 0


def plan(agent: int, instance: Instance, negatives: Iterable[NegativeConstraint],
         goal_h: Optional[Sequence[float]] = None, stats: Optional[PlanStats] = None) -> Optional[TimedPath]:
    """Minimum arrival-time path under negative constraints."""
    return plan_with_landmarks(agent, instance, negatives, (), goal_h, stats)


def plan_with_landmarks(agent: int, instance: Instance, negatives: Iterable[NegativeConstraint],
                        positives: Sequence[PositiveConstraint], goal_h: Optional[Sequence[float]] = None,
                        stats: Optional[PlanStats] = None) -> Optional[TimedPath]:
    """Minimum arrival-time path that also starts every landmark move inside its window.

    States are (vertex, safe interval, set of landmarks already met); the
    landmark set lets one search choose the best landmark start times.
    """
    graph = instance.graph
    start, goal = instance.starts[agent], instance.goals[agent]
    if goal_h is None:
        goal_h = goal_distances(graph, goal)
    table = build_safe_intervals(agent, negatives)
    marks = [p for p in positives if p.agent == agent]
    full = (1 << len(marks)) - 1
    by_move: Dict[Tuple[int, int], List[Tuple[int, float, float]]] = {}
    for idx, p in enumerate(marks):
        by_move.setdefault((p.move.src, p.move.dst), []).append((1 << idx, p.window.lo, p.window.hi))
    mark_hi = [p.window.hi for p in marks]
    vsafe, msafe_of = table.vertex_safe, table.move_safe
    adjacency = graph.adjacency
    no_marks: Tuple = ()

    first = vsafe.get(start, FREE)
    if not first or first[0][0] > 0.0 or math.isinf(goal_h[start]):
        return None
    State = Tuple[int, int, int]
    root: State = (start, 0, 0)
    best: Dict[State, float] = {root: 0.0}
    parent: Dict[State, Tuple[Optional[State], float, float]] = {root: (None, 0.0, 0.0)}
    counter = 0
    heap = [(goal_h[start], 0.0, -0.0, counter, root)]
    while heap:
        _, g, _, _, state = heapq.heappop(heap)
        if g > best.get(state, INF):
            continue
        v, k, mask = state
        if stats is not None:
            stats.expansions += 1
        b = vsafe.get(v, FREE)[k][1]
        if mask == full:
            if v == goal and b == INF:
                return _reconstruct(agent, instance, state, parent, best)
        elif any(not mask & (1 << i) and mark_hi[i] <= g for i in range(len(marks))):
            continue
        for w, dur in adjacency[v]:
            hw = goal_h[w]
            if hw == INF:
                continue
            msafe = msafe_of.get((v, w), FREE)
            lms = by_move.get((v, w), no_marks) if marks else no_marks
            for k2, (c, e) in enumerate(vsafe.get(w, FREE)):
                if e <= g + dur:
                    continue
                if c >= b + dur:
                    break
                t0 = g if g > c - dur else c - dur
                if lms:
                    bounds = [t0]
                    bounds.extend(max(t0, lo) for bit, lo, hi in lms if not mask & bit and hi > t0)
                else:
                    bounds = (t0,)
                for lb in bounds:
                    s = earliest_safe(msafe, lb)
                    if s is None or s >= b:
                        continue
                    while s + dur < c:
                        s = math.nextafter(s, INF)
                    arrive = s + dur
                    if arrive >= e:
                        continue
                    nmask = mask
                    for bit, lo, hi in lms:
                        if lo <= s < hi:
                            nmask |= bit
                    nxt = (w, k2, nmask)
                    if arrive < best.get(nxt, INF) - EPS_TIME:
                        best[nxt] = arrive
                        parent[nxt] = (state, s, dur)
                        counter += 1
                        if stats is not None:
                            stats.generated += 1
                        heapq.heappush(heap, (arrive + hw, arrive, -c, counter, nxt))
    return None


def _reconstruct(agent: int, instance: Instance, state, parent, best) -> TimedPath:
    graph = instance.graph
    steps = []
    while True:
        prev, s, dur = parent[state]
        if prev is None:
            break
        steps.append((prev[0], state[0], best[prev], s, dur))
        state = prev
    steps.reverse()
    motions: List[Motion] = []
    for u, w, g, s, dur in steps:
        if s > g:
            motions.append(make_motion(graph, u, u, g, s - g))
        motions.append(make_motion(graph, u, w, s, dur))
    return TimedPath(agent, tuple(motions), instance.starts[agent], instance.goals[agent])


def landmarks_consistent(positives: Sequence[PositiveConstraint], weight, dist_from) -> bool:
    """Cheap necessary check that every pair of landmarks can be chained in some order.

    ``weight(u, v)`` is the edge length and ``dist_from(v)`` returns shortest
    distances from vertex ``v``.
    """

    def precedes(a: PositiveConstraint, b: PositiveConstraint) -> bool:
        arrive = a.window.lo + weight(a.move.src, a.move.dst)
        return arrive + dist_from(a.move.dst)[b.move.src] < b.window.hi

    for x, a in enumerate(positives):
        for b in positives[x + 1:]:
            if a.move == b.move and a.window.lo < b.window.hi and b.window.lo < a.window.hi:
                continue
            if not precedes(a, b) and not precedes(b, a):
                return False
    return True


__all__ = [
    "SafeIntervalTable", "PlanStats", "build_safe_intervals", "complement", "earliest_safe", "merge_blocks",
    "plan", "plan_with_landmarks", "landmarks_consistent",
]
