"""Deterministic benchmark inputs: empty grid maps, grid scenarios and roadmap scenarios."""
from __future__ import annotations

import math
import random
from pathlib import Path
from typing import List, Sequence, Tuple

from ..world import Graph, GridMap, ParseError

Pair = Tuple[int, int]


def empty_map_text(width: int, height: int) -> str:
    return GridMap.empty(width, height).to_text()


def random_grid_pairs(grid: GridMap, count: int, seed: int) -> List[Tuple[Pair, Pair]]:
    """Distinct random starts and distinct random goals on passable cells."""
    cells = [(x, y) for y in range(grid.height) for x in range(grid.width) if grid.passable(x, y)]
    if count > len(cells):
        raise ValueError(f"{count} agents do not fit on {len(cells)} free cells")
    rng = random.Random(seed)
    return list(zip(rng.sample(cells, count), rng.sample(cells, count)))


def scen_text(map_file: str, grid: GridMap, pairs: Sequence[Tuple[Pair, Pair]]) -> str:
    lines = ["version 1"]
    for (sx, sy), (gx, gy) in pairs:
        octile = max(abs(gx - sx), abs(gy - sy)) + (math.sqrt(2) - 1) * min(abs(gx - sx), abs(gy - sy))
        lines.append(f"0\t{map_file}\t{grid.width}\t{grid.height}\t{sx}\t{sy}\t{gx}\t{gy}\t{octile:.8f}")
    return "\n".join(lines) + "\n"


def random_vertex_pairs(graph: Graph, count: int, seed: int) -> List[Tuple[int, int]]:
    n = len(graph)
    if count > n:
        raise ValueError(f"{count} agents do not fit on {n} vertices")
    rng = random.Random(seed)
    return list(zip(rng.sample(range(n), count), rng.sample(range(n), count)))


def roadmap_scen_text(pairs: Sequence[Tuple[int, int]]) -> str:
    return "".join(f"{s} {g}\n" for s, g in pairs)


def parse_roadmap_scen(text: str) -> List[Tuple[int, int]]:
    """One ``start goal`` vertex-id pair per line; ``#`` starts a comment."""
    out = []
    for n, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError("expected 'start goal'", n)
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError as exc:
            raise ParseError("non-integer vertex id", n) from exc
    return out


def write_grid_benchmark(directory: Path, width: int, height: int, scen_count: int, agents: int,
                         seed: int) -> List[Path]:
    """Write ``empty-W-H.map`` and ``empty-W-H-even-N.scen`` files; returns the written paths."""
    directory.mkdir(parents=True, exist_ok=True)
    name = f"empty-{width}-{height}"
    grid = GridMap.empty(width, height, name)
    written = [directory / f"{name}.map"]
    written[0].write_text(grid.to_text())
    for i in range(1, scen_count + 1):
        pairs = random_grid_pairs(grid, agents, seed * 1000 + i)
        path = directory / f"{name}-even-{i}.scen"
        path.write_text(scen_text(f"{name}.map", grid, pairs))
        written.append(path)
    return written


__all__ = [
    "empty_map_text", "parse_roadmap_scen", "random_grid_pairs", "random_vertex_pairs", "roadmap_scen_text",
    "scen_text", "write_grid_benchmark",
]
