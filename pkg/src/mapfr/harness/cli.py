"""Command line front end: solve, sweep, validate, genroadmap, genbench."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..geometry import DEFAULT_RADIUS
from ..search import NAMED_CONFIGS, SolverConfig, config_label, solve
from ..world import Instance, InputError, ParseError, dump_roadmap, grid_instance, load_roadmap, \
    neighborhood_from_size, parse_map, parse_scen
from .generate import parse_roadmap_scen, write_grid_benchmark
from .roadmap import generate_roadmap
from .solution_io import emit_solution, load_solution
from .sweep import find_maps, parse_spec, run_sweep, success_rates, total_solved, write_csv, write_rates_csv
from .validate import validate

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2

log = logging.getLogger("mapfr")


def load_instance(map_file: str, scen_file: Optional[str], agents: Optional[int], nb: int, radius: float) -> Instance:
    path = Path(map_file)
    if path.suffix == ".graph":
        graph = load_roadmap(path.read_text())
        pairs = parse_roadmap_scen(Path(scen_file).read_text()) if scen_file else []
        pairs = pairs[:agents] if agents else pairs
        return Instance(graph, [s for s, _ in pairs], [g for _, g in pairs], radius, path.stem)
    grid = parse_map(path.read_text(), path.stem)
    pairs = parse_scen(Path(scen_file).read_text()) if scen_file else []
    pairs = pairs[:agents] if agents else pairs
    if agents and len(pairs) < agents:
        raise InputError(f"scenario has only {len(pairs)} agents")
    return grid_instance(grid, neighborhood_from_size(nb), pairs, radius, path.stem)


def _add_instance_args(p: argparse.ArgumentParser, need_scen: bool) -> None:
    p.add_argument("--map", required=True, help=".map grid or .graph roadmap")
    p.add_argument("--scen", required=need_scen, help=".scen file (roadmaps: 'start goal' per line)")
    p.add_argument("--agents", type=int, default=None)
    p.add_argument("--neighborhood", type=int, choices=(4, 8, 16, 32), default=4)
    p.add_argument("--radius", type=float, default=DEFAULT_RADIUS)


def cmd_solve(args) -> int:
    inst = load_instance(args.map, args.scen, args.agents, args.neighborhood, args.radius)
    cfg = SolverConfig(split_mode=args.mode, bypass=args.bypass, prioritize_conflicts=args.prioritize,
                       time_limit=args.time_limit)
    res = solve(inst, cfg)
    print(f"{config_label(cfg)}: {res.status} cost={res.cost:.6f} expanded={res.stats.ct_expanded} "
          f"lowlevel={res.stats.lowlevel_calls} wall_ms={res.stats.wall_ms:.1f}")
    if not res.solved:
        return EXIT_FAIL
    if args.out:
        Path(args.out).write_text(emit_solution(res.solution, inst.graph))
    return EXIT_OK


def cmd_validate(args) -> int:
    cost, tracks = load_solution(Path(args.sol).read_text())
    inst = load_instance(args.map, args.scen, args.agents or len(tracks), args.neighborhood, args.radius)
    report = validate(tracks, inst)
    arrival = sum(t[-1][2] + t[-1][3] for t in tracks if t)
    if abs(arrival - cost) > 1e-6:
        report.add(f"reported cost {cost} differs from summed arrivals {arrival}")
    for v in report.violations:
        print(v)
    print("valid" if report.ok else f"invalid: {len(report.violations)} violation(s)")
    return EXIT_OK if report.ok else EXIT_FAIL


def cmd_sweep(args) -> int:
    spec = parse_spec(args.spec or "")
    maps = find_maps(Path(args.maps))
    configs = [c.strip() for c in args.configs.split(",") if c.strip()]
    records = run_sweep(maps, spec, configs)
    with open(args.out, "w", newline="") as fh:
        write_csv(records, fh, timing=not args.no_timing)
    if args.rates:
        with open(args.rates, "w", newline="") as fh:
            write_rates_csv(success_rates(records, spec.instances), fh)
    for c in configs:
        print(f"{c}: {total_solved(records, c)} solved attempts")
    return EXIT_OK


def cmd_genroadmap(args) -> int:
    graph = generate_roadmap(args.n, args.degree, args.seed)
    Path(args.out).write_text(dump_roadmap(graph))
    print(f"{len(graph)} vertices, {graph.num_edges} edges, mean degree {graph.mean_degree:.3f}")
    return EXIT_OK


def cmd_genbench(args) -> int:
    written = write_grid_benchmark(Path(args.out), args.width, args.height, args.scens, args.agents, args.seed)
    print(f"wrote {len(written)} files to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mapfr", description="Continuous-time multi-agent path finding")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance")
    _add_instance_args(p, need_scen=True)
    p.add_argument("--mode", choices=("plain", "ds", "bc", "db", "dk"), default="ds")
    p.add_argument("--bypass", action="store_true")
    p.add_argument("--prioritize", action="store_true")
    p.add_argument("--time-limit", type=float, default=30.0)
    p.add_argument("--out", help="write the solution as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("validate", help="check a solution file")
    _add_instance_args(p, need_scen=True)
    p.add_argument("--sol", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("sweep", help="run the agent-count sweep over a map directory")
    p.add_argument("--maps", required=True, help="directory with .map/.scen or .graph/.rscen files")
    p.add_argument("--spec", default="", help="e.g. start=5,increment=2,time_limit=30,instances=25,neighborhood=4")
    p.add_argument("--configs", default="Base,BP,DK,BP+DK",
                   help="comma-separated labels: " + ", ".join(NAMED_CONFIGS) + " or mode[+bp][+pc]")
    p.add_argument("--out", required=True, help="per-attempt CSV")
    p.add_argument("--rates", help="optional success-rate CSV")
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-stable output")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("genroadmap", help="generate a random roadmap")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--degree", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_genroadmap)

    p = sub.add_parser("genbench", help="write an empty grid map with random scenarios")
    p.add_argument("--width", type=int, default=8)
    p.add_argument("--height", type=int, default=8)
    p.add_argument("--scens", type=int, default=25)
    p.add_argument("--agents", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_genbench)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ParseError, InputError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
