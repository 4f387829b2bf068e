import io
import json
import math

import pytest

from conftest import triangle_instance
from mapfr.harness.cli import main
from mapfr.harness.generate import (parse_roadmap_scen, random_grid_pairs, random_vertex_pairs, roadmap_scen_text,
                                    scen_text, write_grid_benchmark)
from mapfr.harness.oracle import OracleRefused, integer_wait_solve, oracle_solve
from mapfr.harness.roadmap import generate_roadmap
from mapfr.harness.solution_io import emit_solution, load_solution
from mapfr.harness.sweep import (CSV_COLUMNS, RunRecord, SweepSpec, find_maps, parse_spec, records_csv, run_sweep,
                                 success_rates, total_solved)
from mapfr.harness.validate import tracks_from_paths, validate
from mapfr.search import parse_config, solve
from mapfr.world import (Graph, GridMap, Instance, InputError, ParseError, build_grid_graph, dump_roadmap,
                         grid_instance, neighborhood, parse_scen)

SMALL = GridMap.empty(3, 2)
SWAP = [((0, 0), (2, 0)), ((2, 0), (0, 0))]


@pytest.fixture(scope="module")
def swap_run():
    inst = grid_instance(SMALL, neighborhood(2), SWAP)
    res = solve(inst, parse_config("BP+DK"))
    assert res.solved
    return inst, res


# --- validation -------------------------------------------------------------------


def test_solver_output_validates(swap_run):
    inst, res = swap_run
    assert validate(tracks_from_paths(res.solution.paths, inst.graph), inst).ok


def test_validation_catches_mutations(swap_run):
    inst, res = swap_run
    tracks = tracks_from_paths(res.solution.paths, inst.graph)

    def broken(k, step, value):
        out = [list(t) for t in tracks]
        out[k][step] = value
        return validate(out, inst)

    a, b, t, d = tracks[0][0]
    assert not broken(0, 0, (a, b, t + 0.1, d)).ok                # time gap
    assert not broken(0, 0, (a, b, t, d * 0.5)).ok                # too fast
    assert not broken(0, 0, ((a[0], a[1] + 1), b, t, d)).ok       # teleport
    assert not validate([tracks[0][:-1], tracks[1]], inst).ok     # misses goal
    assert not broken(0, 0, (a, (2.0, 1.0), t, math.sqrt(5))).ok  # missing edge


def test_validation_reports_crossing_agents():
    inst = grid_instance(GridMap.empty(2, 2), neighborhood(3), [((0, 0), (1, 1)), ((1, 0), (0, 1))])
    r2 = math.sqrt(2)
    tracks = [[((0.0, 0.0), (1.0, 1.0), 0.0, r2)], [((1.0, 0.0), (0.0, 1.0), 0.0, r2)]]
    report = validate(tracks, inst)
    assert not report.ok and report.conflicts


def test_resting_agent_conflict_is_found():
    inst = grid_instance(GridMap.empty(3, 1), neighborhood(2), [((0, 0), (1, 0)), ((2, 0), (0, 0))])
    tracks = [[((0.0, 0.0), (1.0, 0.0), 0.0, 1.0)],
              [((2.0, 0.0), (2.0, 0.0), 0.0, 5.0), ((2.0, 0.0), (1.0, 0.0), 5.0, 1.0),
               ((1.0, 0.0), (0.0, 0.0), 6.0, 1.0)]]
    assert validate(tracks, inst).conflicts


# --- solution files ---------------------------------------------------------------


def test_solution_json_round_trip(swap_run):
    inst, res = swap_run
    text = emit_solution(res.solution, inst.graph)
    data = json.loads(text)
    assert set(data) == {"cost", "agents", "stats"}
    assert set(data["agents"][0]["motions"][0]) == {"from", "to", "start", "duration"}
    cost, tracks = load_solution(text)
    assert cost == res.cost
    assert tracks == tracks_from_paths(res.solution.paths, inst.graph)


# --- generators -------------------------------------------------------------------


def test_grid_pairs_are_distinct_and_reproducible():
    grid = GridMap.empty(8, 8)
    pairs = random_grid_pairs(grid, 20, 3)
    assert pairs == random_grid_pairs(grid, 20, 3)
    assert len({s for s, _ in pairs}) == 20 and len({g for _, g in pairs}) == 20
    assert parse_scen(scen_text("empty-8-8.map", grid, pairs)) == pairs


def test_roadmap_scenario_round_trip():
    g = generate_roadmap(16, 5, 0)
    pairs = random_vertex_pairs(g, 4, 1)
    assert parse_roadmap_scen("# start goal\n" + roadmap_scen_text(pairs)) == pairs
    with pytest.raises(ParseError):
        parse_roadmap_scen("1 x\n")


@pytest.mark.parametrize("n, degree, tol", [(158, 4.2, 0.5), (878, 16.7, 1.0)])
def test_roadmap_degree_targets(n, degree, tol):
    g = generate_roadmap(n, degree, 7)
    assert abs(g.mean_degree - degree) <= tol
    assert len(g) >= 0.9 * n
    Instance(g, [0], [1])  # vertices keep one diameter apart


def test_roadmap_is_reproducible():
    a, b = generate_roadmap(40, 5, 11), generate_roadmap(40, 5, 11)
    assert dump_roadmap(a) == dump_roadmap(b)
    assert dump_roadmap(a) != dump_roadmap(generate_roadmap(40, 5, 12))


# --- oracles ----------------------------------------------------------------------


def test_oracle_trivial_and_refusal():
    g = Graph([(0, 0), (1, 0), (2, 0)], [(0, 1, 1.0), (1, 2, 1.0)])
    assert oracle_solve(Instance(g, [0], [2])) == pytest.approx(2.0)
    big = grid_instance(GridMap.empty(4, 4), neighborhood(2), [((0, 0), (3, 3))])
    with pytest.raises(OracleRefused):
        oracle_solve(big)


def test_whole_step_waits_cost_more_on_small_triangle():
    inst = triangle_instance(radius=0.25)
    assert integer_wait_solve(inst) == pytest.approx(5 + math.sqrt(3), abs=1e-9)
    assert oracle_solve(inst) < integer_wait_solve(inst)


# --- sweep ------------------------------------------------------------------------


def test_spec_parsing():
    spec = parse_spec("start=3,increment=1,time_limit=2.5,instances=2,neighborhood=8")
    assert (spec.start, spec.increment, spec.time_limit, spec.instances, spec.neighborhood) == (3, 1, 2.5, 2, 8)
    assert parse_spec("") == SweepSpec()
    with pytest.raises(InputError):
        parse_spec("speed=2")
    with pytest.raises(ValueError):
        parse_spec("start=0")


def test_empty_sweep_writes_header_only():
    assert records_csv([]) == ",".join(CSV_COLUMNS) + "\n"


def test_record_requires_finite_cost_when_solved():
    with pytest.raises(ValueError):
        RunRecord("m", "s", 1, "BP", True, math.inf, 0, 0, 0.0)


def test_small_sweep(tmp_path):
    write_grid_benchmark(tmp_path, 4, 4, 2, 4, seed=1)
    spec = SweepSpec(start=1, increment=2, time_limit=5, instances=2, max_expansions=200)
    maps = find_maps(tmp_path)
    assert [m.name for m in maps] == ["empty-4-4.map"]
    records = run_sweep(maps, spec, ["BP+DK"])
    assert {r.agents for r in records} <= {1, 3, 4}
    assert all(r.solved for r in records if r.agents == 1)
    rates = success_rates(records, spec.instances)
    assert rates[("empty-4-4", "BP+DK", 1)] == 1.0
    assert total_solved(records, "BP+DK") == sum(r.solved for r in records)
    again = run_sweep(maps, spec, ["BP+DK"])
    assert records_csv(records, timing=False) == records_csv(again, timing=False)


# --- command line -----------------------------------------------------------------


def test_cli_solve_validate_round_trip(tmp_path, capsys):
    write_grid_benchmark(tmp_path, 4, 4, 1, 3, seed=2)
    m, s, sol = tmp_path / "empty-4-4.map", tmp_path / "empty-4-4-even-1.scen", tmp_path / "sol.json"
    assert main(["solve", "--map", str(m), "--scen", str(s), "--agents", "3", "--mode", "dk", "--bypass",
                 "--prioritize", "--out", str(sol)]) == 0
    assert main(["validate", "--map", str(m), "--scen", str(s), "--sol", str(sol)]) == 0
    data = json.loads(sol.read_text())
    data["agents"][0]["motions"][0]["duration"] *= 0.5
    sol.write_text(json.dumps(data))
    assert main(["validate", "--map", str(m), "--scen", str(s), "--sol", str(sol)]) == 1


def test_cli_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.map"
    bad.write_text("type octile\nheight 1\n")
    assert main(["solve", "--map", str(bad), "--scen", str(bad)]) == 2
    assert main(["solve", "--map", str(tmp_path / "missing.map"), "--scen", "x"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_genroadmap(tmp_path, capsys):
    out = tmp_path / "r.graph"
    assert main(["genroadmap", "--n", "30", "--degree", "4", "--seed", "1", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0] == str(len(generate_roadmap(30, 4, 1)))
