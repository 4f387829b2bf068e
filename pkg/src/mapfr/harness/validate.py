"""Independent solution checker.

Works on raw coordinate tracks and shares nothing with the solver except the
geometry conflict predicate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple

from ..geometry import INF, GeometryError, MotionSegment, Point2, conflict_predicate
from ..world import Instance

# (from, to, start, duration); from == to is a wait
Step = Tuple[Tuple[float, float], Tuple[float, float], float, float]
Track = List[Step]

TOL = 1e-9


@dataclass
class ValidationReport:
    violations: List[str] = field(default_factory=list)
    conflicts: List[Tuple[int, int, int, int]] = field(default_factory=list)   # (agent a, step a, agent b, step b)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, msg: str) -> None:
        self.violations.append(msg)


def tracks_from_paths(paths, graph) -> List[Track]:
    """Flatten solver paths to coordinate tracks."""
    out = []
    for p in paths:
        out.append([(tuple(graph.positions[m.move.src]), tuple(graph.positions[m.move.dst]), m.start, m.duration)
                    for m in p.motions])
    return out


def _close(p: Sequence[float], q: Sequence[float]) -> bool:
    return abs(p[0] - q[0]) <= TOL and abs(p[1] - q[1]) <= TOL


def _edge_lengths(instance: Instance) -> Dict[Tuple[Tuple[float, float], Tuple[float, float]], float]:
    pos = instance.graph.positions
    out = {}
    for u, v, _ in instance.graph.edges:
        a, b = tuple(pos[u]), tuple(pos[v])
        d = math.hypot(b[0] - a[0], b[1] - a[1])
        out[(a, b)] = d
        out[(b, a)] = d
    return out


def _lookup_edge(edges, a, b):
    hit = edges.get((tuple(a), tuple(b)))
    if hit is not None:
        return hit
    for (p, q), d in edges.items():
        if _close(p, a) and _close(q, b):
            return d
    return None


def _check_track(k: int, track: Track, start, goal, edges, report: ValidationReport) -> None:
    here, now = start, 0.0
    for n, (src, dst, t, dur) in enumerate(track):
        if not _close(src, here):
            report.add(f"agent {k} step {n}: starts at {src}, expected {here}")
        if abs(t - now) > TOL:
            report.add(f"agent {k} step {n}: starts at time {t}, previous step ended at {now}")
        if not dur > 0 or math.isinf(dur):
            report.add(f"agent {k} step {n}: bad duration {dur}")
        if not _close(src, dst):
            length = _lookup_edge(edges, src, dst)
            if length is None:
                report.add(f"agent {k} step {n}: {src} -> {dst} is not an edge")
            elif abs(length - dur) > 1e-7:
                report.add(f"agent {k} step {n}: duration {dur} differs from edge length {length}")
        here, now = dst, t + dur
    if not _close(here, goal):
        report.add(f"agent {k}: ends at {here}, goal is {goal}")


def _segments(track: Track, fallback) -> List[MotionSegment]:
    segs = []
    for a, b, t, d in track:
        try:
            segs.append(MotionSegment(Point2(*a), Point2(*b), t, d))
        except GeometryError:
            pass    # already reported by the track check
    end = track[-1][1] if track else fallback
    t_end = track[-1][2] + track[-1][3] if track else 0.0
    segs.append(MotionSegment(Point2(*end), Point2(*end), t_end, INF))
    return segs


def validate(tracks: Sequence[Track], instance: Instance) -> ValidationReport:
    """Check continuity, start/goal, edge use and pairwise separation (rest at goal included)."""
    report = ValidationReport()
    pos = instance.graph.positions
    if len(tracks) != instance.num_agents:
        report.add(f"{len(tracks)} tracks for {instance.num_agents} agents")
        return report
    edges = _edge_lengths(instance)
    segs = []
    for k, track in enumerate(tracks):
        start, goal = tuple(pos[instance.starts[k]]), tuple(pos[instance.goals[k]])
        _check_track(k, track, start, goal, edges, report)
        segs.append(_segments(track, goal))
    shape_sum = instance.shape_sum
    for a in range(len(segs)):
        for b in range(a + 1, len(segs)):
            for i, sa in enumerate(segs[a]):
                for j, sb in enumerate(segs[b]):
                    if sb.start_time >= sa.end_time or sa.start_time >= sb.end_time:
                        continue
                    if conflict_predicate(sa, sb, shape_sum):
                        report.conflicts.append((a, i, b, j))
                        report.add(f"agents {a} and {b} collide: step {i} vs step {j}")
    return report


__all__ = ["Step", "Track", "ValidationReport", "tracks_from_paths", "validate"]
