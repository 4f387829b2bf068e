"""JSON serialization of solutions."""
from __future__ import annotations

import json
from dataclasses import asdict
from typing import List, Tuple

from .validate import Track, tracks_from_paths


def solution_to_dict(solution, graph) -> dict:
    agents = []
    for k, track in enumerate(tracks_from_paths(solution.paths, graph)):
        agents.append({
            "id": k,
            "motions": [{"from": list(a), "to": list(b), "start": t, "duration": d} for a, b, t, d in track],
        })
    return {"cost": solution.cost, "agents": agents, "stats": asdict(solution.stats)}


def emit_solution(solution, graph) -> str:
    """Serialize with full float precision (shortest round-trip repr)."""
    return json.dumps(solution_to_dict(solution, graph), indent=1)


def load_solution(text: str) -> Tuple[float, List[Track]]:
    """Return (cost, tracks) ordered by agent id."""
    data = json.loads(text)
    agents = sorted(data["agents"], key=lambda a: a["id"])
    tracks = []
    for a in agents:
        tracks.append([(tuple(m["from"]), tuple(m["to"]), float(m["start"]), float(m["duration"]))
                       for m in a["motions"]])
    return float(data["cost"]), tracks


__all__ = ["emit_solution", "load_solution", "solution_to_dict"]
