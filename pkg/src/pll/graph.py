"""Planar graphs stored as rotation systems, rooted graphs and balls."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class PlanarGraph:
    """Finite graph with a rotation system.

    ``rot[v]`` is the cyclic sequence of neighbours of ``v``. Nothing assumes
    the sequence starts anywhere in particular. Instances are treated as
    immutable; mutating helpers return new graphs.
    """

    __slots__ = ("rot", "simple", "_index", "_degrees")

    def __init__(self, rot: Sequence[Sequence[int]], simple: bool = True, validate: bool = True):
        self.rot = tuple(tuple(int(u) for u in r) for r in rot)
        self.simple = simple
        self._index = None
        self._degrees = None
        if validate:
            self._validate()

    def _validate(self):
        n = self.n
        for v, r in enumerate(self.rot):
            for u in r:
                if not 0 <= u < n:
                    raise GraphError(f"vertex {v} has out-of-range neighbour {u}")
                if u == v:
                    raise GraphError(f"self-loop at vertex {v}")
            if self.simple and len(set(r)) != len(r):
                raise GraphError(f"repeated neighbour at vertex {v}")
        # symmetric adjacency, counted with multiplicity
        counts = {}
        for v, r in enumerate(self.rot):
            for u in r:
                counts[(v, u)] = counts.get((v, u), 0) + 1
        for (v, u), c in counts.items():
            if counts.get((u, v), 0) != c:
                raise GraphError(f"adjacency not symmetric between {v} and {u}")

    @property
    def n(self) -> int:
        return len(self.rot)

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is None:
            self._degrees = np.array([len(r) for r in self.rot], dtype=np.int64)
        return self._degrees

    def degree(self, v: int) -> int:
        return len(self.rot[v])

    @property
    def num_edges(self) -> int:
        return int(self.degrees.sum()) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.rot[v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.rot[u]

    def edges(self) -> list[tuple[int, int]]:
        """Edges ``(u, v)`` with ``u < v`` in lexicographic order (one per multi-edge copy)."""
        out = []
        for u, r in enumerate(self.rot):
            for v in r:
                if u < v:
                    out.append((u, v))
        out.sort()
        return out

    def edge_array(self) -> np.ndarray:
        e = self.edges()
        return np.array(e, dtype=np.int64).reshape(-1, 2)

    def position(self, v: int, u: int) -> int:
        """Index of ``u`` in the rotation at ``v``."""
        if self._index is None:
            self._index = [{u: i for i, u in enumerate(r)} for r in self.rot]
        return self._index[v][u]

    def next_around(self, v: int, u: int) -> int:
        """Neighbour following ``u`` in the rotation at ``v``."""
        r = self.rot[v]
        return r[(self.position(v, u) + 1) % len(r)]

    def faces(self) -> list[list[int]]:
        """Face boundary walks.

        The dart ``(u, v)`` is followed by ``(v, w)`` where ``w`` comes right
        after ``u`` in the rotation at ``v``. Each face is returned as the
        vertex sequence of its walk.
        """
        seen = set()
        faces = []
        for u, r in enumerate(self.rot):
            for v in r:
                if (u, v) in seen:
                    continue
                walk = []
                a, b = u, v
                while (a, b) not in seen:
                    seen.add((a, b))
                    walk.append(a)
                    a, b = b, self.next_around(b, a)
                faces.append(walk)
        return faces

    def components(self) -> np.ndarray:
        label = np.full(self.n, -1, dtype=np.int64)
        c = 0
        for s in range(self.n):
            if label[s] >= 0:
                continue
            label[s] = c
            stack = [s]
            while stack:
                v = stack.pop()
                for u in self.rot[v]:
                    if label[u] < 0:
                        label[u] = c
                        stack.append(u)
            c += 1
        return label

    def is_connected(self) -> bool:
        return self.n > 0 and int(self.components().max()) == 0

    def euler_genus(self) -> int:
        """Genus of the embedding given by the rotation system (connected graphs)."""
        if not self.is_connected():
            raise GraphError("genus is only defined here for connected graphs")
        if self.n == 1:
            return 0
        chi = self.n - self.num_edges + len(self.faces())
        return (2 - chi) // 2

    def is_plane(self) -> bool:
        return self.euler_genus() == 0

    def distances(self, source: int) -> np.ndarray:
        dist = np.full(self.n, -1, dtype=np.int64)
        dist[source] = 0
        q = deque([source])
        while q:
            v = q.popleft()
            for u in self.rot[v]:
                if dist[u] < 0:
                    dist[u] = dist[v] + 1
                    q.append(u)
        return dist

    def induced(self, vertices: Sequence[int]) -> tuple["PlanarGraph", np.ndarray]:
        """Induced subgraph keeping the inherited cyclic order; returns (graph, parent ids)."""
        vertices = np.asarray(vertices, dtype=np.int64)
        local = {int(v): i for i, v in enumerate(vertices)}
        rot = [[local[u] for u in self.rot[v] if u in local] for v in vertices]
        return PlanarGraph(rot, simple=self.simple, validate=False), vertices

    def relabel(self, perm: Sequence[int]) -> "PlanarGraph":
        """Graph with vertex ``v`` renamed ``perm[v]``."""
        perm = list(perm)
        rot = [None] * self.n
        for v, r in enumerate(self.rot):
            rot[perm[v]] = [perm[u] for u in r]
        return PlanarGraph(rot, simple=self.simple, validate=False)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], simple: bool = True) -> "PlanarGraph":
        """Graph with neighbour-id order as rotation (no embedding implied)."""
        adj = [[] for _ in range(n)]
        for u, v in edges:
            adj[u].append(v)
            adj[v].append(u)
        return cls([sorted(a) for a in adj], simple=simple)

    def to_json(self, root: int | None = None) -> dict:
        d = {"n": self.n, "rot": [list(r) for r in self.rot]}
        if root is not None:
            d["root"] = int(root)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "PlanarGraph":
        rot = d["rot"]
        if len(rot) != d["n"]:
            raise GraphError("'n' does not match the length of 'rot'")
        return cls(rot)

    def __eq__(self, other):
        return isinstance(other, PlanarGraph) and self.rot == other.rot

    def __hash__(self):
        return hash(self.rot)

    def __repr__(self):
        return f"PlanarGraph(n={self.n}, m={self.num_edges})"


@dataclass(frozen=True)
class RootedGraph:
    graph: PlanarGraph
    root: int

    def __post_init__(self):
        if not 0 <= self.root < self.graph.n:
            raise GraphError(f"root {self.root} is not a vertex")


@dataclass(frozen=True)
class Ball(RootedGraph):
    """Induced ball around a root; ``parent[i]`` is the vertex id in the parent graph."""

    radius: int = 0
    parent: np.ndarray = field(default=None, compare=False, repr=False)


def ball(g: RootedGraph, r: int) -> Ball:
    if r < 0:
        raise GraphError("radius must be non-negative")
    graph = g.graph
    dist = np.full(graph.n, -1, dtype=np.int64)
    dist[g.root] = 0
    order = [g.root]
    q = deque([g.root])
    while q:
        v = q.popleft()
        if dist[v] == r:
            continue
        for u in graph.rot[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                order.append(u)
                q.append(u)
    sub, parent = graph.induced(order)
    return Ball(sub, 0, radius=r, parent=parent)


def load_graph(path) -> tuple[PlanarGraph, int | None]:
    with open(path) as fh:
        d = json.load(fh)
    return PlanarGraph.from_json(d), d.get("root")


def save_graph(g: PlanarGraph, path, root: int | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(g.to_json(root), fh)
