"""Graph families used by the experiments."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .electric import Network
from .graph import GraphError, PlanarGraph
from .rng import stream


def _check(cond, msg):
    if not cond:
        raise GraphError(msg)


def grid(n: int) -> PlanarGraph:
    """n x n grid, vertex ``i*n + j`` at column i, row j; rotations counter-clockwise."""
    _check(n >= 2, "grid needs n >= 2")
    rot = []
    for i in range(n):
        for j in range(n):
            r = []
            for di, dj in ((1, 0), (0, 1), (-1, 0), (0, -1)):
                a, b = i + di, j + dj
                if 0 <= a < n and 0 <= b < n:
                    r.append(a * n + b)
            rot.append(r)
    return PlanarGraph(rot, validate=False)


def grid_coordinates(n: int) -> np.ndarray:
    idx = np.arange(n * n)
    return np.stack([idx // n, idx % n], axis=1).astype(float)


def cycle(n: int) -> PlanarGraph:
    _check(n >= 3, "cycle needs n >= 3")
    return PlanarGraph([[(v - 1) % n, (v + 1) % n] for v in range(n)], validate=False)


def path(n: int) -> PlanarGraph:
    _check(n >= 2, "path needs n >= 2")
    rot = [[v - 1, v + 1] for v in range(n)]
    rot[0] = [1]
    rot[-1] = [n - 2]
    return PlanarGraph(rot, validate=False)


def binary_tree(h: int) -> PlanarGraph:
    """Complete binary tree of height h in heap order (root 0)."""
    _check(h >= 1, "binary_tree needs h >= 1")
    n = 2 ** (h + 1) - 1
    rot = []
    for v in range(n):
        r = []
        if v > 0:
            r.append((v - 1) // 2)
        for c in (2 * v + 1, 2 * v + 2):
            if c < n:
                r.append(c)
        rot.append(r)
    return PlanarGraph(rot, validate=False)


# axial directions of the triangular lattice in counter-clockwise order
_TRI_DIRS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def triangular_disk(r: int) -> PlanarGraph:
    """Hexagonal patch of the triangular lattice with 3r^2 + 3r + 1 vertices.

    Vertex 0 is the centre. Use :func:`triangular_coordinates` for the
    lattice positions (unit spacing).
    """
    _check(r >= 1, "triangular_disk needs r >= 1")
    cells = _hex_cells(r)
    index = {c: i for i, c in enumerate(cells)}
    rot = []
    for q, s in cells:
        rot.append([index[(q + dq, s + ds)] for dq, ds in _TRI_DIRS if (q + dq, s + ds) in index])
    return PlanarGraph(rot, validate=False)


def _hex_cells(r):
    cells = [(q, s) for q in range(-r, r + 1) for s in range(-r, r + 1) if abs(q + s) <= r]
    cells.sort(key=lambda c: (max(abs(c[0]), abs(c[1]), abs(c[0] + c[1])), c))
    return cells


def triangular_coordinates(r: int) -> np.ndarray:
    cells = np.array(_hex_cells(r), dtype=float)
    q, s = cells[:, 0], cells[:, 1]
    return np.stack([q + 0.5 * s, (math.sqrt(3) / 2) * s], axis=1)


def triangular_boundary(r: int) -> list[int]:
    """Outer hexagon vertices of :func:`triangular_disk`."""
    cells = _hex_cells(r)
    return [i for i, (q, s) in enumerate(cells) if max(abs(q), abs(s), abs(q + s)) == r]


@dataclass
class SharpnessGraph:
    """Binary tree of height h with every height-k edge replaced by parallel 2-paths.

    ``apex`` is the top of the tree, ``leaves`` the height-0 vertices,
    ``height[v]`` the height of tree vertex v (-1 on path midpoints).
    """

    network: Network
    apex: int
    leaves: list[int]
    height: np.ndarray
    h: int
    alpha: float


def bundle_size(k: int, alpha: float) -> int:
    # ceil(k^(1/alpha)) guarded against k**2.0 landing a hair above an integer
    x = k ** (1.0 / alpha)
    return int(math.ceil(x - 1e-9 * max(1.0, x)))


def sharpness_graph(h: int, alpha: float) -> SharpnessGraph:
    _check(h >= 1, "sharpness_graph needs h >= 1")
    _check(0 < alpha < 1, "alpha must lie in (0, 1)")
    # heap-ordered tree vertices; depth d has height h - d
    ntree = 2 ** (h + 1) - 1
    rot = [[] for _ in range(ntree)]
    height = [h - int(math.floor(math.log2(v + 1))) for v in range(ntree)]
    for v in range(ntree):
        for c in (2 * v + 1, 2 * v + 2):
            if c >= ntree:
                continue
            k = height[v]
            for _ in range(bundle_size(k, alpha)):
                mid = len(rot)
                rot.append([v, c])
                height.append(-1)
                rot[v].append(mid)
                rot[c].append(mid)
    # rotation at a tree vertex: parent bundle first (reversed, so the 2-paths
    # of a bundle nest without crossing), then children bundles
    for v in range(1, ntree):
        par = [m for m in rot[v] if rot[m][0] != v]
        kids = [m for m in rot[v] if rot[m][0] == v]
        rot[v] = par[::-1] + kids
    g = PlanarGraph(rot, validate=False)
    leaves = list(range(2 ** h - 1, ntree))
    return SharpnessGraph(Network.from_graph(g), 0, leaves, np.array(height), h, alpha)


def sharpness_bound(h: int, alpha: float) -> float:
    """2 * sum_{k<=h} k^(-1/alpha)."""
    return 2.0 * sum(k ** (-1.0 / alpha) for k in range(1, h + 1))


# ---------------------------------------------------------------------------
# triangulations


def bipyramid(n: int) -> PlanarGraph:
    """Double wheel: poles n-2, n-1 over an (n-2)-cycle. Simple sphere triangulation for n >= 5."""
    _check(n >= 4, "need n >= 4")
    if n == 4:
        # K4 embedded with outer face (0, 1, 2)
        return PlanarGraph([[1, 3, 2], [2, 3, 0], [0, 3, 1], [0, 1, 2]], validate=False)
    k = n - 2
    north, south = k, k + 1
    rot = []
    for v in range(k):
        rot.append([(v + 1) % k, north, (v - 1) % k, south])
    rot.append([(k - 1 - i) % k for i in range(k)][::-1])
    rot.append([(k - 1 - i) % k for i in range(k)])
    return PlanarGraph(rot, validate=False)


def flip_edge(rot: list[list[int]], u: int, v: int) -> tuple[int, int] | None:
    """Flip edge uv in place if the result stays a simple triangulation.

    Returns the new edge or None when the flip is rejected.
    """
    ru, rv = rot[u], rot[v]
    iu = rv.index(u)
    w = rv[(iu + 1) % len(rv)]  # face (u, v, w)
    iv = ru.index(v)
    x = ru[(iv + 1) % len(ru)]  # face (v, u, x)
    if w == x or x in rot[w] or len(ru) <= 3 or len(rv) <= 3:
        return None
    # at w the face u->v->w enters from v and leaves to u: insert x after v
    rw = rot[w]
    rw.insert(rw.index(v) + 1, x)
    rx = rot[x]
    rx.insert(rx.index(u) + 1, w)
    ru.remove(v)
    rv.remove(u)
    return (w, x)


def flip_mcmc_triangulation(n: int, steps: int, seed: int, max_degree: int | None = None) -> PlanarGraph:
    """Random simple sphere triangulation by uniform edge-flip proposals.

    Starts from :func:`bipyramid` (degree cap permitting only after mixing).
    The proposal picks a uniform edge; rejections keep the chain symmetric so
    its stationary law is uniform on reachable triangulations. Mixing is not
    certified.
    """
    _check(n >= 4, "need n >= 4")
    rot = [list(r) for r in bipyramid(n).rot]
    if steps <= 0:
        return PlanarGraph(rot, validate=False)
    edges = [(u, v) for u in range(n) for v in rot[u] if u < v]
    rng = stream(seed, 0)
    picks = rng.integers(0, len(edges), size=steps)
    for i in picks.tolist():
        u, v = edges[i]
        if max_degree is not None:
            ru = rot[u]
            rv = rot[v]
            w = rv[(rv.index(u) + 1) % len(rv)]
            x = ru[(ru.index(v) + 1) % len(ru)]
            if len(rot[w]) >= max_degree or len(rot[x]) >= max_degree:
                continue
        new = flip_edge(rot, u, v)
        if new is None:
            continue
        edges[i] = (min(new), max(new))
    return PlanarGraph(rot, validate=False)


def random_plane_graph(n: int, seed: int, extra: float = 0.5) -> PlanarGraph:
    """Connected plane graph obtained from a flip triangulation by deleting
    edges at random while keeping a random spanning tree."""
    _check(n >= 4, "need n >= 4")
    tri = flip_mcmc_triangulation(n, 10 * n, seed)
    rng = stream(seed, 1)
    edges = tri.edges()
    order = rng.permutation(len(edges))
    # random spanning tree via union-find in random order
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    keep = set()
    for i in order.tolist():
        u, v = edges[i]
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            keep.add((u, v))
    for i in order.tolist():
        if edges[i] not in keep and rng.random() < extra:
            keep.add(edges[i])
    rot = [[u for u in r if (min(u, v), max(u, v)) in keep] for v, r in enumerate(tri.rot)]
    return PlanarGraph(rot, validate=False)


def sharpness_spine(h: int, alpha: float) -> tuple[Network, int, int]:
    """The bundles on the path from one leaf to the apex of :func:`sharpness_graph`.

    Everything else hangs off this path at cut vertices and carries no
    current between its ends, so Reff(leaf <-> apex) is the same on the spine.
    Returns (network, leaf, apex).
    """
    _check(h >= 1, "sharpness_spine needs h >= 1")
    _check(0 < alpha < 1, "alpha must lie in (0, 1)")
    edges = []
    nxt = h + 1  # spine vertex k sits at height k
    for k in range(1, h + 1):
        for _ in range(bundle_size(k, alpha)):
            edges.append((k - 1, nxt))
            edges.append((nxt, k))
            nxt += 1
    return Network(nxt, edges), 0, h
