"""High-level constraint-tree search over continuous-time paths."""
from __future__ import annotations

import heapq
import itertools
import math
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .cliques import (CorePair, OffsetTable, bc_split, core_pair, db_split, dk_split, ds_split,
                      plain_sets)
from .constraints import (Conflict, ConflictCountTable, NegativeConstraint, PositiveConstraint, TimedPath,
                          constraints_satisfied, count_conflicts_against, path_conflicts)
from .geometry import conflict_interval
from .sipp import PlanStats, landmarks_consistent, plan_with_landmarks
from .world import Graph, Instance, goal_distances

SPLIT_MODES = ("plain", "ds", "bc", "db", "dk")


@dataclass(frozen=True)
class SolverConfig:
    split_mode: str = "ds"
    bypass: bool = False
    prioritize_conflicts: bool = True
    time_limit: float = 30.0
    epsilon: float = 1e-6
    kcg_metric: str = "count"
    classify_limit: int = 8
    record_splits: bool = False
    max_expansions: Optional[int] = None   # deterministic budget; None means unbounded

    def __post_init__(self) -> None:
        if self.split_mode not in SPLIT_MODES:
            raise ValueError(f"unknown split mode {self.split_mode!r}")
        if not self.time_limit > 0:
            raise ValueError("time limit must be positive")
        if self.max_expansions is not None and self.max_expansions < 0:
            raise ValueError("expansion budget must be non-negative")

    @property
    def label(self) -> str:
        return config_label(self)


NAMED_CONFIGS = {
    "CCBS": dict(split_mode="plain"),
    "Base": dict(split_mode="ds"),
    "BP": dict(split_mode="ds", bypass=True),
    "BC": dict(split_mode="bc"),
    "BP+BC": dict(split_mode="bc", bypass=True),
    "DB": dict(split_mode="db"),
    "BP+DB": dict(split_mode="db", bypass=True),
    "DK": dict(split_mode="dk"),
    "BP+DK": dict(split_mode="dk", bypass=True),
}


def parse_config(label: str, **overrides) -> SolverConfig:
    """Build a config from a named label (``BP+DK``) or ``mode[+bp][+pc|+nopc]``."""
    if label in NAMED_CONFIGS:
        return SolverConfig(**{**NAMED_CONFIGS[label], **overrides})
    parts = label.lower().split("+")
    kw = dict(split_mode=parts[0], bypass=False, prioritize_conflicts=False)
    for p in parts[1:]:
        if p == "bp":
            kw["bypass"] = True
        elif p == "pc":
            kw["prioritize_conflicts"] = True
        else:
            raise ValueError(f"unknown config flag {p!r} in {label!r}")
    return SolverConfig(**{**kw, **overrides})


def config_label(cfg: SolverConfig) -> str:
    for name, kw in NAMED_CONFIGS.items():
        if cfg.prioritize_conflicts and all(getattr(cfg, k) == v for k, v in kw.items()) \
                and cfg.bypass == kw.get("bypass", False):
            return name
    return cfg.split_mode + ("+bp" if cfg.bypass else "") + ("+pc" if cfg.prioritize_conflicts else "")


@dataclass
class SearchStats:
    ct_expanded: int = 0
    ct_generated: int = 0
    lowlevel_calls: int = 0
    bypasses: int = 0
    wall_ms: float = 0.0


@dataclass(frozen=True)
class SplitRecord:
    """Constraint sets emitted by one split (kept for offline property checks)."""

    mode: str
    positive: Optional[PositiveConstraint]
    first: Tuple[NegativeConstraint, ...]
    second: Tuple[NegativeConstraint, ...]


@dataclass
class Solution:
    paths: List[TimedPath]
    cost: float
    stats: SearchStats


@dataclass
class SolveResult:
    status: str                      # solved, timeout, limit, unsolvable, exhausted
    solution: Optional[Solution]
    stats: SearchStats
    splits: List[SplitRecord] = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == "solved"

    @property
    def cost(self) -> float:
        return self.solution.cost if self.solution else math.inf


@dataclass
class CTNode:
    uid: int
    negatives: Dict[int, Tuple[NegativeConstraint, ...]]
    positives: Dict[int, Tuple[PositiveConstraint, ...]]
    paths: List[TimedPath]
    cct: ConflictCountTable
    depth: int = 0

    @property
    def cost(self) -> float:
        return sum(p.cost for p in self.paths)

    @property
    def num_conflicts(self) -> int:
        return self.cct.total


def detect_conflicts(paths: Sequence[TimedPath], graph: Graph, shape_sum: float) -> List[Conflict]:
    """Every conflicting motion pair, rest-at-goal included, ordered by overlap start."""
    out = []
    for a, b in itertools.combinations(paths, 2):
        out.extend(path_conflicts(a, b, graph, shape_sum))
    out.sort(key=_conflict_order)
    return out


def _conflict_order(c: Conflict):
    return (c.overlap.lo, c.agent_i, c.agent_j, c.motion_i.start, c.motion_j.start)


def node_conflicts(node: CTNode) -> List[Conflict]:
    cct = node.cct
    motions = {a: {(m.move, m.start): m for m in ms} for a, ms in cct._motions.items()}
    out = []
    for (a, mv, st), peers in cct.entries.items():
        for (b, mv2, st2) in peers:
            if a < b:
                ma, mb = motions[a][(mv, st)], motions[b][(mv2, st2)]
                iv = conflict_interval(ma.segment, mb.segment, cct.shape_sum)
                if iv is not None:
                    out.append(Conflict(a, b, ma, mb, iv))
    out.sort(key=_conflict_order)
    return out


class Solver:
    """One constraint-tree search; owns all mutable state of a solve."""

    def __init__(self, instance: Instance, config: SolverConfig):
        self.instance = instance
        self.config = config
        self.graph = instance.graph
        self.shape_sum = instance.shape_sum
        self.offsets = OffsetTable(self.graph, self.shape_sum)
        self.h = [goal_distances(self.graph, g) for g in instance.goals]
        self._dist_cache: Dict[int, List[float]] = {}
        self._replans: Dict[tuple, Optional[TimedPath]] = {}
        # per-agent constraint sets recur across branches, so plans are shared tree-wide
        self._plans: Dict[tuple, Optional[TimedPath]] = {}
        self.stats = SearchStats()
        self.splits: List[SplitRecord] = []
        self._uid = itertools.count()
        self._deadline = math.inf

    # -- low level ---------------------------------------------------------

    def _dist_from(self, v: int) -> List[float]:
        if v not in self._dist_cache:
            self._dist_cache[v] = goal_distances(self.graph, v)
        return self._dist_cache[v]

    def replan(self, node: CTNode, agent: int, extra_neg: Sequence[NegativeConstraint] = (),
               extra_pos: Sequence[PositiveConstraint] = ()) -> Optional[TimedPath]:
        key = (node.uid, agent, tuple(extra_neg), tuple(extra_pos))
        if key in self._replans:
            return self._replans[key]
        negs = node.negatives.get(agent, ()) + tuple(extra_neg)
        pos = node.positives.get(agent, ()) + tuple(extra_pos)
        plan_key = (agent, frozenset(negs), frozenset(pos))
        if plan_key in self._plans:
            path = self._plans[plan_key]
        elif extra_pos and not landmarks_consistent(pos, self.graph.weight, self._dist_from):
            path = None
        else:
            self.stats.lowlevel_calls += 1
            path = plan_with_landmarks(agent, self.instance, negs, pos, self.h[agent], PlanStats())
        self._plans[plan_key] = path
        self._replans[key] = path
        return path

    # -- children ----------------------------------------------------------

    def make_child(self, node: CTNode, negs: Sequence[NegativeConstraint],
                   pos: Sequence[PositiveConstraint] = ()) -> Optional[CTNode]:
        by_agent_n: Dict[int, List[NegativeConstraint]] = {}
        by_agent_p: Dict[int, List[PositiveConstraint]] = {}
        for c in negs:
            by_agent_n.setdefault(c.agent, []).append(c)
        for c in pos:
            by_agent_p.setdefault(c.agent, []).append(c)
        paths = list(node.paths)
        cct = node.cct.copy()
        for a in sorted(set(by_agent_n) | set(by_agent_p)):
            en, ep = by_agent_n.get(a, []), by_agent_p.get(a, [])
            if constraints_satisfied(paths[a], en, ep):
                continue
            new = self.replan(node, a, en, ep)
            if new is None:
                return None
            cct.replace_path(a, paths[a], new)
            paths[a] = new
        negatives = dict(node.negatives)
        positives = dict(node.positives)
        for a, cs in by_agent_n.items():
            negatives[a] = negatives.get(a, ()) + tuple(cs)
        for a, cs in by_agent_p.items():
            positives[a] = positives.get(a, ()) + tuple(cs)
        self.stats.ct_generated += 1
        return CTNode(next(self._uid), negatives, positives, paths, cct, node.depth + 1)

    # -- conflict choice ---------------------------------------------------

    def _increase(self, node: CTNode, neg: NegativeConstraint) -> float:
        new = self.replan(node, neg.agent, (neg,))
        return math.inf if new is None else new.cost - node.paths[neg.agent].cost

    def select_conflict(self, node: CTNode, conflicts: Sequence[Conflict]) -> Tuple[Conflict, CorePair]:
        usable = []
        wanted = self.config.classify_limit if self.config.prioritize_conflicts else 1
        for c in conflicts:
            core = core_pair(c, self.offsets)
            if core is not None:
                usable.append((c, core))
                if len(usable) >= max(wanted, 1):
                    break
        if not usable:
            raise RuntimeError("no conflict admits a split")
        if not self.config.prioritize_conflicts:
            return usable[0]
        best = None
        for rank, (c, core) in enumerate(usable):
            ni, nj = plain_sets(core)
            eps = self.config.epsilon
            cls = (self._increase(node, ni) > eps) + (self._increase(node, nj) > eps)
            if best is None or cls > best[0]:
                best = (cls, rank, c, core)
            if cls == 2:
                break
        return best[2], best[3]

    # -- splitting ---------------------------------------------------------

    def split(self, node: CTNode, core: CorePair) -> List[Tuple[List[NegativeConstraint], List[PositiveConstraint]]]:
        mode = self.config.split_mode
        if mode != "plain" and core.i.move.is_wait and core.j.move.is_wait:
            mode = "plain"
        if mode == "plain":
            ni, nj = plain_sets(core)
            self._record("plain", None, [ni], [nj])
            return [([ni], []), ([nj], [])]
        if mode == "bc":
            ci, cj = bc_split(core, self.graph, self.offsets)
            self._record("bc", None, ci, cj)
            return [(ci, []), (cj, [])]
        if mode == "ds":
            ds = ds_split(core, self._ds_side(node, core))
        elif mode == "db":
            ds = db_split(core, self.graph, self.offsets)
        else:
            ds = dk_split(core, node.cct, self.graph, self.offsets, self.config.kcg_metric)
        self._record(mode, ds.positive, ds.negatives, [ds.mirror])
        return [(ds.negatives, [ds.positive]), ([ds.mirror], [])]

    def _ds_side(self, node: CTNode, core: CorePair) -> str:
        if core.i.move.is_wait:
            return "j"
        if core.j.move.is_wait:
            return "i"
        ni, nj = plain_sets(core)
        di, dj = self._increase(node, ni), self._increase(node, nj)
        if di != dj and abs(di - dj) > self.config.epsilon:
            return "i" if di > dj else "j"
        return "i" if core.i.agent < core.j.agent else "j"

    def _record(self, mode: str, positive, first, second) -> None:
        if self.config.record_splits:
            self.splits.append(SplitRecord(mode, positive, tuple(first), tuple(second)))

    def try_bypass(self, node: CTNode, core: CorePair,
                   children: Sequence[Tuple[List[NegativeConstraint], List[PositiveConstraint]]]) -> bool:
        """Adopt an equal-cost replacement path with strictly fewer conflicts."""
        for negs, _ in children:
            for side in (core.i, core.j):
                mine = [c for c in negs if c.agent == side.agent]
                if not mine or constraints_satisfied(node.paths[side.agent], mine):
                    continue
                new = self.replan(node, side.agent, mine)
                old = node.paths[side.agent]
                if new is None or abs(new.cost - old.cost) > self.config.epsilon:
                    continue
                before = node.cct.agent_total(side.agent)
                after = count_conflicts_against(new, node.paths, self.graph, self.shape_sum)
                if after < before:
                    node.cct.replace_path(side.agent, old, new)
                    node.paths[side.agent] = new
                    self.stats.bypasses += 1
                    return True
        return False

    # -- main loop ---------------------------------------------------------

    def root(self) -> Optional[CTNode]:
        paths = []
        for a in range(self.instance.num_agents):
            self.stats.lowlevel_calls += 1
            p = plan_with_landmarks(a, self.instance, (), (), self.h[a])
            if p is None:
                return None
            paths.append(p)
        cct = ConflictCountTable.rebuild(paths, self.graph, self.shape_sum)
        return CTNode(next(self._uid), {}, {}, paths, cct)

    def solve(self) -> SolveResult:
        t0 = time.perf_counter()
        self._deadline = t0 + self.config.time_limit
        root = self.root()
        if root is None:
            self.stats.wall_ms = (time.perf_counter() - t0) * 1000.0
            return SolveResult("unsolvable", None, self.stats, self.splits)
        counter = itertools.count()
        heap = [(root.cost, root.num_conflicts, next(counter), root)]
        status = "exhausted"
        found = None
        while heap:
            if time.perf_counter() > self._deadline:
                status = "timeout"
                break
            if self.config.max_expansions is not None and self.stats.ct_expanded >= self.config.max_expansions:
                status = "limit"
                break
            _, _, _, node = heapq.heappop(heap)
            conflicts = node_conflicts(node)
            if not conflicts:
                status, found = "solved", node
                break
            self.stats.ct_expanded += 1
            _, core = self.select_conflict(node, conflicts)
            children = self.split(node, core)
            if self.config.bypass and self.try_bypass(node, core, children):
                heapq.heappush(heap, (node.cost, node.num_conflicts, next(counter), node))
                continue
            for negs, pos in children:
                child = self.make_child(node, negs, pos)
                if child is not None:
                    heapq.heappush(heap, (child.cost, child.num_conflicts, next(counter), child))
        self.stats.wall_ms = (time.perf_counter() - t0) * 1000.0
        if found is None:
            return SolveResult(status, None, self.stats, self.splits)
        return SolveResult("solved", Solution(list(found.paths), found.cost, self.stats), self.stats, self.splits)


def solve(instance: Instance, config: Optional[SolverConfig] = None) -> SolveResult:
    return Solver(instance, config or SolverConfig()).solve()


__all__ = [
    "CTNode", "NAMED_CONFIGS", "SPLIT_MODES", "Solution", "SolveResult", "Solver", "SolverConfig", "SearchStats",
    "SplitRecord", "config_label", "detect_conflicts", "node_conflicts", "parse_config", "solve",
]
