"""Completing plane graphs to triangulations, and structural validators."""

from __future__ import annotations

from dataclasses import dataclass

from .graph import GraphError, PlanarGraph


@dataclass
class TriangulationReport:
    graph: PlanarGraph
    added_vertices: int
    added_edges: int
    degree_factor: float
    size_factor: float


def is_triangulation(g: PlanarGraph) -> bool:
    """Simple, connected, genus 0 and every face a triangle (n >= 3)."""
    if g.n < 3 or not g.simple or not g.is_connected():
        return False
    if any(len(set(r)) != len(r) for r in g.rot):
        return False
    if not g.is_plane():
        return False
    return all(len(f) == 3 for f in g.faces()) and g.num_edges == 3 * g.n - 6


def _zigzag_pairs(m):
    """Diagonals (i, j) by walk index, alternating sides from corner 0."""
    pairs = []
    lo, hi = 1, m - 1
    pairs.append((lo, hi))
    move_hi = True
    while hi - lo > 2:
        if move_hi:
            hi -= 1
        else:
            lo += 1
        pairs.append((lo, hi))
        move_hi = not move_hi
    return pairs


def _insert_fan(rot, walk, pairs):
    m = len(walk)
    targets = {i: [] for i in range(m)}
    for i, j in pairs:
        targets[i].append(j)
        targets[j].append(i)
    for i, js in targets.items():
        if not js:
            continue
        # angular order at walk[i], from the predecessor side towards the successor
        js.sort(key=lambda j: (i - 1 - j) % m)
        r = rot[walk[i]]
        at = r.index(walk[i - 1]) + 1
        r[at:at] = [walk[j] for j in js]


def _try_zigzag(rot, walk):
    m = len(walk)
    if len(set(walk)) != m:
        return False
    start = walk.index(min(walk))
    pairs = _zigzag_pairs(m)
    # corner at the smallest vertex first; other corners only on clashes
    for shift in range(m):
        s = (start + shift) % m
        w = walk[s:] + walk[:s]
        ok = True
        seen = set()
        for i, j in pairs:
            e = (min(w[i], w[j]), max(w[i], w[j]))
            if w[j] in rot[w[i]] or e in seen:
                ok = False
                break
            seen.add(e)
        if ok:
            _insert_fan(rot, w, pairs)
            return True
    return False


def _ring(rot, walk):
    """Line the face with new vertices a_j, a_j adjacent to walk[j], walk[j+1]."""
    m = len(walk)
    base = len(rot)
    a = [base + j for j in range(m)]
    for j in range(m):
        rot.append([walk[(j + 1) % m], walk[j], a[j - 1], a[(j + 1) % m]])
    for i in range(m):
        r = rot[walk[i]]
        at = r.index(walk[i - 1]) + 1
        r[at:at] = [a[i - 1], a[i]]


def triangulate_zigzag(g: PlanarGraph) -> TriangulationReport:
    """Add edges (and, where a face is not a simple cycle, a ring of new
    vertices) until every face is a triangle. Long faces get zigzag fans."""
    if g.n < 2:
        raise GraphError("need at least one edge")
    if not g.is_connected():
        raise GraphError("graph must be connected")
    if not g.is_plane():
        raise GraphError("rotation system is not planar (Euler check failed)")
    rot = [list(r) for r in g.rot]
    if g.n == 2:
        rot.append([0, 1])
        rot[0].append(2)
        rot[1].append(2)
    while True:
        cur = PlanarGraph(rot, validate=False)
        long = [f for f in cur.faces() if len(f) > 3]
        if not long:
            break
        walk = long[0]
        if not _try_zigzag(rot, walk):
            _ring(rot, walk)
    out = PlanarGraph(rot)
    if not is_triangulation(out):
        raise GraphError("internal error: result is not a triangulation")
    dfac = float(out.degrees.max() / max(1, g.degrees.max()))
    return TriangulationReport(out, out.n - g.n, out.num_edges - g.num_edges, dfac, out.n / g.n)
