"""Continuous-time collision kernel for disc agents moving on straight segments.

All predicates are closed form: the squared distance between two constant
velocity motions is a quadratic in time, so its minimum over the common time
window can be read off directly.  Unsafe start-time intervals are located by
bisection over that predicate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Tuple

EPS_GEOM = 1e-9
EPS_TIME = 1e-9
DEFAULT_RADIUS = math.sqrt(2.0) / 4.0
INF = math.inf


class GeometryError(ValueError):
    """Raised for malformed motions or violated preconditions."""


class Point2(NamedTuple):
    x: float
    y: float


@dataclass(frozen=True)
class TimeInterval:
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = False

    def __post_init__(self) -> None:
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise GeometryError(f"invalid interval [{self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def __contains__(self, t: float) -> bool:
        above = t >= self.lo if self.closed_lo else t > self.lo
        below = t <= self.hi if self.closed_hi else t < self.hi
        return above and below

    def shifted(self, delta: float) -> "TimeInterval":
        return TimeInterval(self.lo + delta, self.hi + delta, self.closed_lo, self.closed_hi)


@dataclass(frozen=True)
class DiscShape:
    radius: float = DEFAULT_RADIUS

    def __post_init__(self) -> None:
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise GeometryError(f"radius must be positive, got {self.radius}")


@dataclass(frozen=True)
class MotionSegment:
    """Straight constant-speed traversal from ``src`` to ``dst``.

    A wait has ``src == dst``; only waits may have infinite duration (used for
    resting at the goal).
    """

    src: Point2
    dst: Point2
    start_time: float
    duration: float

    def __post_init__(self) -> None:
        vals = (self.src[0], self.src[1], self.dst[0], self.dst[1], self.start_time)
        if not all(math.isfinite(v) for v in vals):
            raise GeometryError("motion has non-finite coordinates or start time")
        if not self.duration > 0:
            raise GeometryError(f"motion duration must be positive, got {self.duration}")
        if math.isinf(self.duration) and not self.is_wait:
            raise GeometryError("only waits may last forever")
        if math.isnan(self.duration):
            raise GeometryError("motion duration is NaN")

    @property
    def is_wait(self) -> bool:
        return self.src[0] == self.dst[0] and self.src[1] == self.dst[1]

    @property
    def end_time(self) -> float:
        return self.start_time + self.duration

    @property
    def velocity(self) -> Tuple[float, float]:
        if self.is_wait:
            return (0.0, 0.0)
        return ((self.dst[0] - self.src[0]) / self.duration, (self.dst[1] - self.src[1]) / self.duration)

    def position(self, t: float) -> Point2:
        if not (self.start_time <= t <= self.end_time):
            raise GeometryError(f"time {t} outside motion domain")
        if self.is_wait:
            return Point2(self.src[0], self.src[1])
        f = (t - self.start_time) / self.duration
        return Point2(self.src[0] + f * (self.dst[0] - self.src[0]), self.src[1] + f * (self.dst[1] - self.src[1]))

    def shifted(self, delta: float) -> "MotionSegment":
        return MotionSegment(self.src, self.dst, self.start_time + delta, self.duration)


# ---------------------------------------------------------------------------
# raw kernels (floats only; the hot path of the solver)


def _window(a: MotionSegment, b: MotionSegment) -> Tuple[float, float]:
    return max(a.start_time, b.start_time), min(a.end_time, b.end_time)


def _relative_at(a: MotionSegment, b: MotionSegment, t: float) -> Tuple[float, float, float, float]:
    """Relative position a-b at time t and relative velocity."""
    avx, avy = a.velocity
    bvx, bvy = b.velocity
    ax = a.src[0] + avx * (t - a.start_time)
    ay = a.src[1] + avy * (t - a.start_time)
    bx = b.src[0] + bvx * (t - b.start_time)
    by = b.src[1] + bvy * (t - b.start_time)
    return ax - bx, ay - by, avx - bvx, avy - bvy


def min_sq_distance(a: MotionSegment, b: MotionSegment) -> Optional[Tuple[float, float]]:
    """Minimum squared distance over the common time window and its time.

    Returns None when the windows do not overlap over a positive length.
    """
    lo, hi = _window(a, b)
    if not hi > lo:
        return None
    rx, ry, vx, vy = _relative_at(a, b, lo)
    vv = vx * vx + vy * vy
    if vv == 0.0:
        return rx * rx + ry * ry, lo
    u = -(rx * vx + ry * vy) / vv
    span = hi - lo
    if u < 0.0:
        u = 0.0
    elif u > span:
        u = span
    dx = rx + vx * u
    dy = ry + vy * u
    return dx * dx + dy * dy, lo + u


def _threshold(shape_sum: float) -> float:
    if not shape_sum > 0:
        raise GeometryError(f"shape_sum must be positive, got {shape_sum}")
    return shape_sum - EPS_GEOM


def conflict_predicate(a: MotionSegment, b: MotionSegment, shape_sum: float) -> bool:
    """True iff the two discs overlap (distance < shape_sum - EPS_GEOM) at some common time."""
    thr = _threshold(shape_sum)
    m = min_sq_distance(a, b)
    return m is not None and m[0] < thr * thr


def conflict_interval(a: MotionSegment, b: MotionSegment, shape_sum: float) -> Optional[TimeInterval]:
    """Maximal time interval during which the discs overlap, or None."""
    thr = _threshold(shape_sum)
    lo, hi = _window(a, b)
    if not hi > lo:
        return None
    rx, ry, vx, vy = _relative_at(a, b, lo)
    r2 = thr * thr
    vv = vx * vx + vy * vy
    c = rx * rx + ry * ry - r2
    if vv == 0.0:
        return TimeInterval(lo, hi, False, False) if c < 0 else None
    bq = rx * vx + ry * vy
    disc = bq * bq - vv * c
    if disc <= 0:
        return None
    sq = math.sqrt(disc)
    # numerically stable quadratic roots of vv u^2 + 2 bq u + c = 0
    q = -(bq + math.copysign(sq, bq)) if bq != 0 else -sq
    u1, u2 = q / vv, (c / q if q != 0 else sq / vv)
    if u1 > u2:
        u1, u2 = u2, u1
    t1 = max(lo, lo + u1)
    t2 = min(hi, lo + u2)
    if not t2 > t1:
        return None
    return TimeInterval(t1, t2, False, False)


def _point_segment_u(px: float, py: float, sx: float, sy: float, dx: float, dy: float, umax: float) -> float:
    """Parameter in [0, umax] minimising |s + d*u - p|."""
    dd = dx * dx + dy * dy
    if dd == 0.0:
        return 0.0
    u = ((px - sx) * dx + (py - sy) * dy) / dd
    return min(max(u, 0.0), umax)


def _seed_start(fixed: MotionSegment, src: Point2, dst: Point2, duration: float) -> Tuple[float, float]:
    """Probe start time minimising the closest approach to ``fixed``.

    Minimises |fixed(t) - probe(u)|^2 over the box of fixed-time t and
    probe-elapsed u; returns (min squared distance, start time t - u).
    """
    fvx, fvy = fixed.velocity
    pvx, pvy = (dst[0] - src[0]) / duration, (dst[1] - src[1]) / duration
    cx, cy = fixed.src[0] - src[0], fixed.src[1] - src[1]
    df = fixed.duration
    if math.isinf(df):
        # fixed is a permanent wait: only the probe parameter matters
        u = _point_segment_u(fixed.src[0], fixed.src[1], src[0], src[1], pvx, pvy, duration)
        ex, ey = cx - pvx * u, cy - pvy * u
        tp = min(1.0, duration) * 0.5
        return ex * ex + ey * ey, fixed.start_time + tp - u
    best = (INF, 0.0)

    def consider(tp: float, u: float) -> None:
        nonlocal best
        ex = cx + fvx * tp - pvx * u
        ey = cy + fvy * tp - pvy * u
        d2 = ex * ex + ey * ey
        if d2 < best[0]:
            best = (d2, fixed.start_time + tp - u)

    det = fvx * (-pvy) - (-pvx) * fvy
    if det != 0.0:
        # solve cx + fv*tp - pv*u = 0
        tp = (-cx * (-pvy) - (-pvx) * (-cy)) / det
        u = (fvx * (-cy) - fvy * (-cx)) / det
        if 0.0 <= tp <= df and 0.0 <= u <= duration:
            consider(tp, u)
    for tp in (0.0, df):
        u = _point_segment_u(cx + fvx * tp, cy + fvy * tp, 0.0, 0.0, pvx, pvy, duration)
        consider(tp, u)
    for u in (0.0, duration):
        # minimise |c - pv*u + fv*tp| over tp
        tp = _point_segment_u(0.0, 0.0, cx - pvx * u, cy - pvy * u, fvx, fvy, df)
        consider(tp, u)
    return best


def _probe(src: Point2, dst: Point2, duration: float, start: float) -> MotionSegment:
    return MotionSegment(src, dst, start, duration)


def _bisect(fixed: MotionSegment, src: Point2, dst: Point2, duration: float, shape_sum: float,
            inside: float, outside: float) -> Tuple[float, float]:
    """Shrink [inside, outside] until within EPS_TIME; returns (inner, outer)."""
    while abs(outside - inside) > EPS_TIME:
        mid = 0.5 * (inside + outside)
        if mid == inside or mid == outside:
            break
        if conflict_predicate(fixed, _probe(src, dst, duration, mid), shape_sum):
            inside = mid
        else:
            outside = mid
    return inside, outside


def start_time_conflicts(fixed: MotionSegment, src: Point2, dst: Point2, duration: float,
                         shape_sum: float) -> Optional[Tuple[float, float, float, float]]:
    """All probe start times conflicting with ``fixed``.

    The conflicting set is a single interval (projection of a convex set).
    Returns (lo_inner, lo_outer, hi_inner, hi_outer) or None; the outer
    values are the closest non-conflicting start times found.
    """
    if not duration > 0 or not math.isfinite(duration):
        raise GeometryError("probe duration must be positive and finite")
    thr = _threshold(shape_sum)
    d2, seed = _seed_start(fixed, src, dst, duration)
    if not d2 < thr * thr:
        return None
    if not conflict_predicate(fixed, _probe(src, dst, duration, seed), shape_sum):
        # the closest approach sits on a window corner; nudge inward
        for step in (1e-9, 1e-7, 1e-5, 1e-3):
            for cand in (seed + step, seed - step):
                if conflict_predicate(fixed, _probe(src, dst, duration, cand), shape_sum):
                    seed = cand
                    break
            else:
                continue
            break
        else:
            return None
    lo_in, lo_out = _bisect(fixed, src, dst, duration, shape_sum, seed, fixed.start_time - duration)
    if math.isinf(fixed.duration):
        return lo_in, lo_out, INF, INF
    hi_in, hi_out = _bisect(fixed, src, dst, duration, shape_sum, seed, fixed.end_time)
    return lo_in, lo_out, hi_in, hi_out


def unsafe_interval(fixed: MotionSegment, probe_edge: Tuple[Point2, Point2, float], shape_sum: float,
                    seed_start: float) -> TimeInterval:
    """Probe start times around ``seed_start`` that conflict with ``fixed``.

    Returns the half-open ``[lo, hi)`` component containing the seed; starting
    at ``hi`` is conflict free.  Start times are non-negative, so ``lo`` is
    clipped at zero.
    """
    src, dst, duration = probe_edge
    if seed_start < 0:
        raise GeometryError("seed start must be non-negative")
    if not conflict_predicate(fixed, _probe(src, dst, duration, seed_start), shape_sum):
        raise GeometryError("probe started at seed does not conflict with fixed motion")
    lo_in, _ = _bisect(fixed, src, dst, duration, shape_sum, seed_start, fixed.start_time - duration)
    if math.isinf(fixed.duration):
        hi_out = INF
    else:
        _, hi_out = _bisect(fixed, src, dst, duration, shape_sum, seed_start, fixed.end_time)
    return TimeInterval(max(lo_in, 0.0), hi_out)


def stationary_sweep(point: Point2, src: Point2, dst: Point2, duration: float,
                     shape_sum: float) -> Optional[Tuple[float, float]]:
    """Elapsed times (u1, u2) within a move at which a disc resting at ``point`` is hit.

    The set {u in [0, duration] : |src + v u - point| < shape_sum} is an
    open interval; returns its endpoints or None.
    """
    mover = MotionSegment(src, dst, 0.0, duration)
    rest = MotionSegment(point, point, 0.0, INF)
    iv = conflict_interval(mover, rest, shape_sum)
    if iv is None:
        return None
    return iv.lo, iv.hi


# ---------------------------------------------------------------------------
# static distance helpers


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    u = _point_segment_u(p[0], p[1], a[0], a[1], dx, dy, 1.0)
    ex, ey = a[0] + dx * u - p[0], a[1] + dy * u - p[1]
    return math.hypot(ex, ey)


def _orient(a: Point2, b: Point2, c: Point2) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(a: Point2, b: Point2, c: Point2, d: Point2) -> bool:
    o1, o2, o3, o4 = _orient(a, b, c), _orient(a, b, d), _orient(c, d, a), _orient(c, d, b)
    if ((o1 > 0 and o2 < 0) or (o1 < 0 and o2 > 0)) and ((o3 > 0 and o4 < 0) or (o3 < 0 and o4 > 0)):
        return True
    return (
        (o1 == 0 and point_segment_distance(c, a, b) == 0)
        or (o2 == 0 and point_segment_distance(d, a, b) == 0)
        or (o3 == 0 and point_segment_distance(a, c, d) == 0)
        or (o4 == 0 and point_segment_distance(b, c, d) == 0)
    )


def segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def segment_box_distance(a: Point2, b: Point2, lo: Point2, hi: Point2) -> float:
    """Exact distance between segment ab and the closed axis-aligned box [lo, hi]."""
    # Liang-Barsky clip: does the segment touch the box?
    t0, t1 = 0.0, 1.0
    dx, dy = b[0] - a[0], b[1] - a[1]
    touching = True
    for p, q in ((-dx, a[0] - lo[0]), (dx, hi[0] - a[0]), (-dy, a[1] - lo[1]), (dy, hi[1] - a[1])):
        if p == 0:
            if q < 0:
                touching = False
                break
        else:
            r = q / p
            if p < 0:
                t0 = max(t0, r)
            else:
                t1 = min(t1, r)
            if t0 > t1:
                touching = False
                break
    if touching:
        return 0.0
    corners = (Point2(lo[0], lo[1]), Point2(hi[0], lo[1]), Point2(hi[0], hi[1]), Point2(lo[0], hi[1]))
    best = min(point_segment_distance(c, a, b) for c in corners)
    for p in (a, b):
        cx = min(max(p[0], lo[0]), hi[0])
        cy = min(max(p[1], lo[1]), hi[1])
        best = min(best, math.hypot(p[0] - cx, p[1] - cy))
    return best
