"""Deterministic random roadmap generator."""
from __future__ import annotations

import logging
import math
from typing import Dict, List, Tuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, minimum_spanning_tree
from scipy.spatial import cKDTree

from ..geometry import DEFAULT_RADIUS
from ..world import Graph

log = logging.getLogger(__name__)

POINT_DENSITY = 0.5      # vertices per unit area
SEPARATION_MARGIN = 1.05  # keep vertices slightly more than one agent diameter apart


def sample_points(n: int, min_sep: float, rng: np.random.Generator) -> np.ndarray:
    """Uniform dart throwing in a square with a minimum separation between points."""
    side = math.sqrt(n / POINT_DENSITY)
    while True:
        buckets: Dict[Tuple[int, int], List[Tuple[float, float]]] = {}
        pts: List[Tuple[float, float]] = []
        misses = 0
        while len(pts) < n and misses < 2000:
            x, y = (float(v) for v in rng.uniform(0.0, side, size=2))
            cx, cy = int(x // min_sep), int(y // min_sep)
            clear = all((x - qx) ** 2 + (y - qy) ** 2 >= min_sep * min_sep
                        for dx in (-1, 0, 1) for dy in (-1, 0, 1)
                        for qx, qy in buckets.get((cx + dx, cy + dy), ()))
            if clear:
                buckets.setdefault((cx, cy), []).append((x, y))
                pts.append((x, y))
                misses = 0
            else:
                misses += 1
        if len(pts) == n:
            return np.array(pts)
        side *= 1.1


def _edges_for_degree(pts: np.ndarray, target_degree: float) -> List[Tuple[int, int]]:
    n = len(pts)
    k = min(n - 1, int(math.ceil(target_degree)) + 2)
    tree = cKDTree(pts)
    dist, idx = tree.query(pts, k=k + 1)
    cand = {}
    for u in range(n):
        for d, v in zip(dist[u][1:], idx[u][1:]):
            a, b = (u, int(v)) if u < v else (int(v), u)
            cand[(a, b)] = float(d)
    pairs = sorted(cand, key=lambda e: (cand[e], e))
    rows = [a for a, _ in pairs]
    cols = [b for _, b in pairs]
    # tiny offset keeps zero-length weights from vanishing in the sparse matrix
    w = coo_matrix(([cand[e] + 1e-12 for e in pairs], (rows, cols)), shape=(n, n))
    mst = minimum_spanning_tree(w).tocoo()
    chosen = {(min(a, b), max(a, b)) for a, b in zip(mst.row.tolist(), mst.col.tolist())}
    want = int(round(target_degree * n / 2.0))
    for e in pairs:
        if len(chosen) >= want:
            break
        chosen.add(e)
    return sorted(chosen)


def _largest_component(n: int, edges: List[Tuple[int, int]]) -> Tuple[List[int], List[Tuple[int, int]]]:
    if not edges:
        return [0] if n else [], []
    m = coo_matrix(([1] * len(edges), ([a for a, _ in edges], [b for _, b in edges])), shape=(n, n))
    _, labels = connected_components(m, directed=False)
    counts = np.bincount(labels)
    keep_label = int(np.argmax(counts))
    keep = [v for v in range(n) if labels[v] == keep_label]
    return keep, [(a, b) for a, b in edges if labels[a] == keep_label]


def generate_roadmap(vertex_count: int, target_mean_degree: float, seed: int,
                     radius: float = DEFAULT_RADIUS) -> Graph:
    """Random points plus nearest-neighbour edges tuned to a mean degree; largest component kept."""
    if vertex_count <= 0 or not target_mean_degree > 0:
        raise ValueError("vertex count and target degree must be positive")
    rng = np.random.default_rng(seed)
    pts = sample_points(vertex_count, 2.0 * radius * SEPARATION_MARGIN, rng)
    degree = target_mean_degree
    if degree > vertex_count - 1:
        log.warning("target degree %.2f unreachable with %d vertices; using complete graph",
                    target_mean_degree, vertex_count)
        degree = vertex_count - 1
    if vertex_count == 1:
        return Graph([tuple(pts[0])], [])
    edges = _edges_for_degree(pts, degree)
    keep, edges = _largest_component(vertex_count, edges)
    if len(keep) < vertex_count:
        log.warning("dropped %d vertices outside the largest component", vertex_count - len(keep))
    remap = {v: i for i, v in enumerate(keep)}
    positions = [(float(pts[v][0]), float(pts[v][1])) for v in keep]
    out = []
    for a, b in edges:
        (x0, y0), (x1, y1) = positions[remap[a]], positions[remap[b]]
        out.append((remap[a], remap[b], math.hypot(x1 - x0, y1 - y0)))
    graph = Graph(positions, out)
    if abs(graph.mean_degree - target_mean_degree) > 0.5:
        log.warning("mean degree %.2f misses target %.2f", graph.mean_degree, target_mean_degree)
    return graph


__all__ = ["generate_roadmap", "sample_points"]
