"""Benchmark sweep: grow the agent count per instance until a config fails."""
from __future__ import annotations

import csv
import io
import logging
import math
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, TextIO, Tuple

from ..geometry import DEFAULT_RADIUS
from ..search import parse_config, solve
from ..world import Instance, InputError, ParseError, grid_instance, load_roadmap, neighborhood_from_size, \
    parse_map, parse_scen
from .generate import parse_roadmap_scen
from .validate import tracks_from_paths, validate

log = logging.getLogger(__name__)

CSV_COLUMNS = ("map", "scen", "agents", "config", "solved", "cost", "ct_expanded", "lowlevel_calls", "wall_ms")


@dataclass(frozen=True)
class RunRecord:
    map: str
    scen: str
    agents: int
    config: str
    solved: bool
    cost: float
    ct_expanded: int
    lowlevel_calls: int
    wall_ms: float

    def __post_init__(self) -> None:
        if self.solved and not math.isfinite(self.cost):
            raise ValueError("a solved record needs a finite cost")


@dataclass(frozen=True)
class SweepSpec:
    start: int = 5
    increment: int = 2
    time_limit: float = 30.0
    instances: int = 25
    neighborhood: int = 4
    radius: float = DEFAULT_RADIUS
    max_expansions: Optional[int] = None

    def __post_init__(self) -> None:
        if min(self.start, self.increment, self.instances) < 1 or not self.time_limit > 0:
            raise ValueError("sweep counts and time limit must be positive")


def parse_spec(text: str) -> SweepSpec:
    """Parse ``key=value`` pairs separated by commas, e.g. ``start=5,increment=2,time_limit=30``."""
    kinds = {f.name: f.type for f in fields(SweepSpec)}
    kw = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        key, sep, value = item.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in kinds:
            raise InputError(f"bad sweep spec entry {item!r}")
        if key == "max_expansions":
            kw[key] = None if value.strip().lower() == "none" else int(value)
        elif key in ("time_limit", "radius"):
            kw[key] = float(value)
        else:
            kw[key] = int(value)
    return SweepSpec(**kw)


# ---------------------------------------------------------------------------
# inputs


@dataclass
class Scenario:
    map_name: str
    scen_name: str
    build: object      # callable: agent count -> Instance
    available: int


def _natural_key(name: str):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name)]


def scenario_files(map_path: Path, limit: int) -> List[Path]:
    """Scenario files next to a map, preferring ``*-even-*`` ones, in natural order."""
    stem = map_path.stem
    ext = ".scen" if map_path.suffix == ".map" else ".rscen"
    found = sorted((p for p in map_path.parent.glob(f"{stem}-*{ext}")), key=lambda p: _natural_key(p.name))
    even = [p for p in found if "-even-" in p.name]
    return (even or found)[:limit]


def load_scenarios(map_path: Path, spec: SweepSpec) -> List[Scenario]:
    out = []
    if map_path.suffix == ".map":
        grid = parse_map(map_path.read_text(), map_path.stem)
        nb = neighborhood_from_size(spec.neighborhood)
        for scen in scenario_files(map_path, spec.instances):
            try:
                pairs = parse_scen(scen.read_text())
            except (OSError, ParseError) as exc:
                log.error("skipping %s: %s", scen, exc)
                continue

            def build(k, pairs=pairs, name=scen.name):
                return grid_instance(grid, nb, pairs[:k], spec.radius, grid.name)
            out.append(Scenario(map_path.stem, scen.name, build, len(pairs)))
    else:
        graph = load_roadmap(map_path.read_text())
        for scen in scenario_files(map_path, spec.instances):
            try:
                pairs = parse_roadmap_scen(scen.read_text())
            except (OSError, ParseError) as exc:
                log.error("skipping %s: %s", scen, exc)
                continue

            def build(k, pairs=pairs):
                return Instance(graph, [s for s, _ in pairs[:k]], [g for _, g in pairs[:k]], spec.radius,
                                map_path.stem)
            out.append(Scenario(map_path.stem, scen.name, build, len(pairs)))
    return out


# ---------------------------------------------------------------------------
# running


def run_cell(instance: Instance, label: str, spec: SweepSpec, map_name: str, scen_name: str) -> RunRecord:
    cfg = parse_config(label, time_limit=spec.time_limit, max_expansions=spec.max_expansions)
    res = solve(instance, cfg)
    solved = res.solved
    if solved:
        report = validate(tracks_from_paths(res.solution.paths, instance.graph), instance)
        if not report.ok:
            log.error("%s/%s %s: solution failed validation: %s", map_name, scen_name, label, report.violations[:3])
            solved = False
    return RunRecord(map_name, scen_name, instance.num_agents, label, solved,
                     res.cost if solved else math.inf, res.stats.ct_expanded, res.stats.lowlevel_calls,
                     round(res.stats.wall_ms, 3))


def sweep_scenario(scen: Scenario, label: str, spec: SweepSpec) -> List[RunRecord]:
    records = []
    k = min(spec.start, scen.available)
    while k >= 1:
        try:
            inst = scen.build(k)
        except InputError as exc:
            log.error("%s/%s with %d agents: %s", scen.map_name, scen.scen_name, k, exc)
            break
        rec = run_cell(inst, label, spec, scen.map_name, scen.scen_name)
        records.append(rec)
        if not rec.solved or k >= scen.available:
            break
        k = min(k + spec.increment, scen.available)
    return records


def run_sweep(maps: Sequence[Path], spec: SweepSpec, configs: Sequence[str]) -> List[RunRecord]:
    records: List[RunRecord] = []
    for map_path in maps:
        try:
            scenarios = load_scenarios(Path(map_path), spec)
        except (OSError, ParseError, InputError) as exc:
            log.error("skipping map %s: %s", map_path, exc)
            continue
        for label in configs:
            for scen in scenarios:
                records.extend(sweep_scenario(scen, label, spec))
    return records


def find_maps(directory: Path) -> List[Path]:
    return sorted(list(directory.glob("*.map")) + list(directory.glob("*.graph")), key=lambda p: _natural_key(p.name))


# ---------------------------------------------------------------------------
# output


def write_csv(records: Iterable[RunRecord], out: TextIO, timing: bool = True) -> None:
    """One row per attempt; ``timing=False`` writes wall_ms as 0 for byte-stable output."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow([r.map, r.scen, r.agents, r.config, int(r.solved), repr(r.cost), r.ct_expanded,
                    r.lowlevel_calls, r.wall_ms if timing else 0])


def records_csv(records: Iterable[RunRecord], timing: bool = True) -> str:
    buf = io.StringIO()
    write_csv(records, buf, timing)
    return buf.getvalue()


def success_rates(records: Sequence[RunRecord], instances: Optional[int] = None
                  ) -> Dict[Tuple[str, str, int], float]:
    """Fraction of instances solved per (map, config, agent count).

    An instance that stopped at a smaller count counts as unsolved at larger ones.
    """
    solved: Dict[Tuple[str, str, int], int] = {}
    scen_sets: Dict[Tuple[str, str], set] = {}
    counts: Dict[Tuple[str, str], set] = {}
    for r in records:
        scen_sets.setdefault((r.map, r.config), set()).add(r.scen)
        counts.setdefault((r.map, r.config), set()).add(r.agents)
        if r.solved:
            solved[(r.map, r.config, r.agents)] = solved.get((r.map, r.config, r.agents), 0) + 1
    rates = {}
    for (m, c), ks in counts.items():
        denom = instances or len(scen_sets[(m, c)])
        for k in sorted(ks):
            rates[(m, c, k)] = solved.get((m, c, k), 0) / denom
    return rates


def write_rates_csv(rates: Dict[Tuple[str, str, int], float], out: TextIO) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("map", "config", "agents", "success_rate"))
    for (m, c, k), v in sorted(rates.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        w.writerow([m, c, k, f"{v:.4f}"])


def total_solved(records: Sequence[RunRecord], config: str) -> int:
    return sum(1 for r in records if r.config == config and r.solved)


__all__ = [
    "CSV_COLUMNS", "RunRecord", "SweepSpec", "find_maps", "load_scenarios", "parse_spec", "records_csv",
    "run_cell", "run_sweep", "success_rates", "sweep_scenario", "total_solved", "write_csv", "write_rates_csv",
]
