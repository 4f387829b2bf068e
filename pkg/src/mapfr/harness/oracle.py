"""Exhaustive reference solvers for tiny instances.

Both oracles enumerate walks in order of length and schedule each walk
exactly; they share nothing with the solver beyond the collision predicate.
"""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from ..geometry import INF, MotionSegment, Point2, conflict_predicate
from ..world import Graph, Instance, goal_distances

Walk = Tuple[int, ...]
BISECT_TOL = 1e-12


class OracleRefused(ValueError):
    """Instance exceeds the oracle's size bounds."""


def walks_by_length(graph: Graph, start: int, goal: int, max_hops: int = 10) -> Iterator[Tuple[float, Walk]]:
    """Walks from start to goal in nondecreasing length (best-first, consistent heuristic)."""
    h = goal_distances(graph, goal)
    if math.isinf(h[start]):
        return
    tie = itertools.count()
    heap = [(h[start], 0.0, next(tie), (start,))]
    while heap:
        _, g, _, walk = heapq.heappop(heap)
        if walk[-1] == goal:
            yield g, walk
        if len(walk) - 1 >= max_hops:
            continue
        for w, wt in graph.adjacency[walk[-1]]:
            if not math.isinf(h[w]):
                heapq.heappush(heap, (g + wt + h[w], g + wt, next(tie), walk + (w,)))


class _LazyList:
    def __init__(self, it: Iterator):
        self._it = it
        self.items: List = []
        self.done = False

    def get(self, i: int):
        while len(self.items) <= i and not self.done:
            try:
                self.items.append(next(self._it))
            except StopIteration:
                self.done = True
        return self.items[i] if i < len(self.items) else None


def combinations_by_sum(lists: Sequence[_LazyList]) -> Iterator[Tuple[float, Tuple]]:
    """Index tuples over sorted lazy lists in nondecreasing total key."""
    k = len(lists)
    first = tuple(0 for _ in range(k))
    items = [lst.get(0) for lst in lists]
    if any(x is None for x in items):
        return
    seen = {first}
    heap = [(sum(x[0] for x in items), first)]
    while heap:
        total, idx = heapq.heappop(heap)
        yield total, tuple(lists[a].get(idx[a]) for a in range(k))
        for a in range(k):
            nxt = idx[:a] + (idx[a] + 1,) + idx[a + 1:]
            if nxt in seen:
                continue
            item = lists[a].get(nxt[a])
            if item is None:
                continue
            seen.add(nxt)
            heapq.heappush(heap, (total - lists[a].get(idx[a])[0] + item[0], nxt))


# ---------------------------------------------------------------------------
# independent offset computations (bisection over the predicate only)


def _bisect(pred, good: float, bad: float) -> float:
    """Boundary between ``good`` (pred true) and ``bad``; returns the bad side."""
    while abs(bad - good) > BISECT_TOL:
        mid = 0.5 * (good + bad)
        if mid in (good, bad):
            break
        if pred(mid):
            good = mid
        else:
            bad = mid
    return bad


def move_offsets(pa: Tuple[Point2, Point2, float], pb: Tuple[Point2, Point2, float], delta: float,
                 shape_sum: float) -> Tuple[float, float]:
    """Non-conflicting offsets just outside the conflicting run that contains ``delta``."""
    a = MotionSegment(pa[0], pa[1], 0.0, pa[2])

    def hit(d: float) -> bool:
        return conflict_predicate(a, MotionSegment(pb[0], pb[1], d, pb[2]), shape_sum)

    return _bisect(hit, delta, -pb[2]), _bisect(hit, delta, pa[2])


def sweep_times(p: Point2, move: Tuple[Point2, Point2, float], shape_sum: float) -> Tuple[float, float]:
    """Elapsed times bounding when a move passes within reach of a resting disc at ``p``."""
    src, dst, w = move
    m = MotionSegment(src, dst, 0.0, w)

    def before(x: float) -> bool:   # resting at p during (-1, x) conflicts
        return x > 0 and conflict_predicate(m, MotionSegment(p, p, -1.0, x + 1.0), shape_sum)

    def after(x: float) -> bool:    # resting at p from x on conflicts
        return x < w and conflict_predicate(m, MotionSegment(p, p, x, INF), shape_sum)

    return _bisect(lambda x: not before(x), 0.0, w), _bisect(after, 0.0, w)


# ---------------------------------------------------------------------------
# scheduling a fixed walk combination


@dataclass
class _Plan:
    walks: List[Walk]
    weights: List[List[float]]
    var: Dict[Tuple[int, int], int]    # (agent, hop) -> variable index; 0 is the zero clock


def _least_schedule(n: int, edges: List[Tuple[int, int, float]]) -> Optional[List[float]]:
    """Least solution of x_v >= x_u + c with x_0 = 0, or None if infeasible."""
    x = [-INF] * n
    x[0] = 0.0
    for _ in range(n):
        changed = False
        for u, v, c in edges:
            if x[u] != -INF and x[u] + c > x[v] + 1e-12:
                x[v] = x[u] + c
                changed = True
        if not changed:
            break
    else:
        return None
    if x[0] > 1e-12:
        return None
    return [max(0.0, t) if t != -INF else 0.0 for t in x]


def schedule_walks(graph: Graph, walks: Sequence[Walk], shape_sum: float, bound: float = INF,
                   deadline: float = INF) -> Optional[float]:
    """Minimum sum of arrival times for fixed walks, or None if none below ``bound``."""
    pos = graph.positions
    var: Dict[Tuple[int, int], int] = {}
    weights = []
    base: List[Tuple[int, int, float]] = []
    for a, walk in enumerate(walks):
        ws = [graph.weight(walk[k], walk[k + 1]) for k in range(len(walk) - 1)]
        weights.append(ws)
        for k in range(len(ws)):
            var[(a, k)] = len(var) + 1
            base.append((0, var[(a, k)], 0.0))
            if k:
                base.append((var[(a, k - 1)], var[(a, k)], ws[k - 1]))
    n = len(var) + 1

    def cost_of(x: List[float]) -> float:
        return sum(x[var[(a, len(ws) - 1)]] + ws[-1] for a, ws in enumerate(weights) if ws)

    def motions(x: List[float], a: int):
        """(kind, hop, segment, arrive_var, leave_var) for agent a."""
        walk, ws = walks[a], weights[a]
        out = []
        t = 0.0
        for k in range(len(walk)):
            leave = x[var[(a, k)]] if k < len(ws) else INF
            if leave > t:
                p = pos[walk[k]]
                out.append(("stay", k, MotionSegment(p, p, t, leave - t)))
            if k < len(ws):
                out.append(("move", k, MotionSegment(pos[walk[k]], pos[walk[k + 1]], leave, ws[k])))
                t = leave + ws[k]
        return out

    best = [bound]

    def first_conflict(x: List[float]):
        ms = [motions(x, a) for a in range(len(walks))]
        found = None
        for a, b in itertools.combinations(range(len(walks)), 2):
            for ma in ms[a]:
                for mb in ms[b]:
                    if ma[0] == "stay" and mb[0] == "stay":
                        continue
                    if conflict_predicate(ma[2], mb[2], shape_sum):
                        t = max(ma[2].start_time, mb[2].start_time)
                        if found is None or t < found[0]:
                            found = (t, a, ma, b, mb)
        return found

    def branch(extra: List[Tuple[int, int, float]]) -> None:
        if time.perf_counter() > deadline:
            raise TimeoutError
        x = _least_schedule(n, base + extra)
        if x is None:
            return
        c = cost_of(x)
        if c >= best[0] - 1e-9:
            return
        hit = first_conflict(x)
        if hit is None:
            best[0] = c
            return
        for option in _disjuncts(hit, x, walks, weights, var, pos, shape_sum):
            branch(extra + option)

    try:
        branch([])
    except RecursionError:
        return None
    return best[0] if best[0] < bound else None


def _disjuncts(hit, x, walks, weights, var, pos, shape_sum) -> List[List[Tuple[int, int, float]]]:
    _, a, ma, b, mb = hit
    if ma[0] == "stay":
        a, ma, b, mb = b, mb, a, ma
    ka = ma[1]
    ta = var[(a, ka)]
    seg_a = (pos[walks[a][ka]], pos[walks[a][ka + 1]], weights[a][ka])
    if mb[0] == "move":
        kb = mb[1]
        tb = var[(b, kb)]
        seg_b = (pos[walks[b][kb]], pos[walks[b][kb + 1]], weights[b][kb])
        lo, hi = move_offsets(seg_a, seg_b, x[tb] - x[ta], shape_sum)
        # t_b - t_a <= lo   or   t_b - t_a >= hi
        return [[(tb, ta, -lo)], [(ta, tb, hi)]]
    kb = mb[1]
    elo, ehi = sweep_times(pos[walks[b][kb]], seg_a, shape_sum)
    options = []
    if kb < len(weights[b]):
        # leave before the sweep starts: t_leave <= t_a + elo
        options.append([(var[(b, kb)], ta, -elo)])
    if kb > 0:
        # arrive after the sweep ends: t_{kb-1} + w >= t_a + ehi
        options.append([(ta, var[(b, kb - 1)], ehi - weights[b][kb - 1])])
    else:
        # present from time zero: the move must end its sweep by then
        options.append([(ta, 0, ehi)])
    return options


def oracle_solve(instance: Instance, max_hops: int = 8, time_limit: float = 120.0,
                 check_bounds: bool = True) -> Optional[float]:
    """Optimal sum of arrival times by walk enumeration and exact scheduling."""
    g = instance.graph
    if check_bounds and (instance.num_agents > 3 or len(g) > 8 or g.num_edges > 12):
        raise OracleRefused("oracle handles at most 3 agents, 8 vertices and 12 edges")
    deadline = time.perf_counter() + time_limit
    lists = [_LazyList(walks_by_length(g, s, t, max_hops)) for s, t in zip(instance.starts, instance.goals)]
    best = INF
    for total, combo in combinations_by_sum(lists):
        if total >= best - 1e-9:
            break
        if time.perf_counter() > deadline:
            raise TimeoutError("oracle time limit")
        walks = [w for _, w in combo]
        try:
            c = schedule_walks(g, walks, instance.shape_sum, best, deadline)
        except TimeoutError:
            raise TimeoutError("oracle time limit") from None
        if c is not None and c < best:
            best = c
    return None if math.isinf(best) else best


# ---------------------------------------------------------------------------
# single-agent oracle with interval-set propagation


def _intersect(a: List[Tuple[float, float]], b: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    out = []
    for lo1, hi1 in a:
        for lo2, hi2 in b:
            lo, hi = max(lo1, lo2), min(hi1, hi2)
            if hi > lo:
                out.append((lo, hi))
    return sorted(out)


def _complement(blocks: Sequence[Tuple[float, float]]) -> List[Tuple[float, float]]:
    out, t = [], 0.0
    for lo, hi in sorted(blocks):
        if lo > t:
            out.append((t, lo))
        t = max(t, hi)
    out.append((t, INF))
    return out


def oracle_plan(graph: Graph, start: int, goal: int, move_blocks: Dict[Tuple[int, int], List[Tuple[float, float]]],
                vertex_blocks: Dict[int, List[Tuple[float, float]]],
                landmarks: Sequence[Tuple[Tuple[int, int], Tuple[float, float]]] = (),
                max_hops: int = 9) -> Optional[float]:
    """Earliest goal arrival for one agent by exhaustive walk enumeration.

    Along each walk the exact set of reachable times is propagated as a union
    of half-open intervals; landmark moves are assigned to walk hops in every
    possible way.
    """
    vsafe = {v: _complement(b) for v, b in vertex_blocks.items()}
    msafe = {m: _complement(b) for m, b in move_blocks.items()}
    free = [(0.0, INF)]
    best = INF
    horizon = max([hi for bl in list(move_blocks.values()) + list(vertex_blocks.values()) for _, hi in bl]
                  + [w[1] for _, w in landmarks] + [0.0])
    for length, walk in walks_by_length(graph, start, goal, max_hops):
        if length >= best - 1e-12 or length > horizon + 2 * sum(w for _, _, w in graph.edges) + 1:
            break
        hops = [(walk[k], walk[k + 1]) for k in range(len(walk) - 1)]
        choices = [[k for k, h in enumerate(hops) if h == lm[0]] for lm in landmarks]
        # one execution may serve several landmarks on the same move
        for assign in itertools.product(*choices) if landmarks else [()]:
            windows: Dict[int, List[Tuple[float, float]]] = {}
            for lm, k in zip(landmarks, assign):
                windows.setdefault(k, []).append(lm[1])
            best = min(best, _propagate(graph, walk, hops, vsafe, msafe, windows, free))
    return None if math.isinf(best) else best


def _propagate(graph, walk, hops, vsafe, msafe, windows, free) -> float:
    # presence at the start vertex from time 0
    vs = vsafe.get(walk[0], free)
    if not any(lo <= 0.0 < hi for lo, hi in vs):
        return INF
    reach = [(0.0, 0.0)]
    for k, (u, w) in enumerate(hops):
        vs = vsafe.get(u, free)
        depart = []
        for lo, hi in reach:
            for slo, shi in vs:
                if slo <= lo < shi:
                    depart.append((lo, shi))
        depart = _intersect(depart, msafe.get((u, w), free))
        for win in windows.get(k, []):
            depart = _intersect(depart, [win])
        wt = graph.weight(u, w)
        moved = [(lo + wt, hi + wt) for lo, hi in depart]
        reach = []
        for lo, hi in _intersect(moved, vsafe.get(w, free)):
            reach.append((lo, lo))  # earliest arrival in each reachable piece dominates
        reach = sorted(set(reach))
        if not reach:
            return INF
    vs = vsafe.get(walk[-1], free)
    for lo, _ in reach:
        for slo, shi in vs:
            if slo <= lo < shi and shi == INF:
                return lo
    return INF


# ---------------------------------------------------------------------------
# whole-step waiting reference


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _timed_segments(graph: Graph, walk: Walk, waits: Sequence[int]) -> List[MotionSegment]:
    pos = graph.positions
    segs, t = [], 0.0
    for k in range(len(walk) - 1):
        u, w = walk[k], walk[k + 1]
        if waits[k]:
            segs.append(MotionSegment(Point2(*pos[u]), Point2(*pos[u]), t, float(waits[k])))
            t += waits[k]
        d = graph.weight(u, w)
        segs.append(MotionSegment(Point2(*pos[u]), Point2(*pos[w]), t, d))
        t += d
    goal = pos[walk[-1]]
    segs.append(MotionSegment(Point2(*goal), Point2(*goal), t, INF))
    return segs


def _separated(tracks: Sequence[List[MotionSegment]], shape_sum: float) -> bool:
    for a, b in itertools.combinations(tracks, 2):
        for sa in a:
            for sb in b:
                if conflict_predicate(sa, sb, shape_sum):
                    return False
    return True


def integer_wait_solve(instance: Instance, max_hops: int = 6, max_wait: int = 4,
                       time_limit: float = 60.0) -> Optional[float]:
    """Best sum of costs when every wait lasts a whole number of time units.

    Walks are tried by length and waits by total amount, so the first feasible
    schedule for a walk combination is its best; returns None if nothing fits
    within the hop and wait bounds.
    """
    g = instance.graph
    deadline = time.perf_counter() + time_limit
    lists = [_LazyList(walks_by_length(g, s, t, max_hops)) for s, t in zip(instance.starts, instance.goals)]
    best = INF
    for total, combo in combinations_by_sum(lists):
        if total >= best - 1e-9:
            break
        walks = [w for _, w in combo]
        slots = [len(w) - 1 for w in walks]
        for extra in range(max_wait + 1):
            if total + extra >= best - 1e-9:
                break
            if time.perf_counter() > deadline:
                raise TimeoutError("oracle time limit")
            found = False
            for dist in _compositions(extra, sum(slots)):
                waits, k = [], 0
                for s in slots:
                    waits.append(dist[k:k + s])
                    k += s
                tracks = [_timed_segments(g, w, ws) for w, ws in zip(walks, waits)]
                if _separated(tracks, instance.shape_sum):
                    found = True
                    break
            if found:
                best = total + extra
                break
    return None if math.isinf(best) else best
