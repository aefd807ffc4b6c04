"""Star-tree transform: subdivide every edge, then replace each vertex star
by a balanced binary tree, giving a graph of maximum degree 3.

Vertex numbering of the transformed graph: ``v`` is the tree root ``w_v``
of original vertex ``v``; ``n + i`` is the edge vertex ``w_e`` of the i-th
edge in ``g.edges()`` order; internal non-root tree nodes come after.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .electric import Flow, Network, NetworkError
from .graph import PlanarGraph


def subdivide(g: PlanarGraph) -> tuple[PlanarGraph, dict]:
    """Insert a degree-2 vertex ``w_e`` on every edge; returns (G', {(u, v): w_e})."""
    n = g.n
    wmap = {}
    rot = [None] * (n + g.num_edges)
    for i, (u, v) in enumerate(g.edges()):
        w = n + i
        wmap[(u, v)] = wmap[(v, u)] = w
        rot[w] = [u, v]
    for v in range(n):
        rot[v] = [wmap[(v, u)] for u in g.rot[v]]
    return PlanarGraph(rot, validate=False), wmap


def _tree_shape(k):
    """Heap-ordered complete binary tree with k leaves.

    Returns (parent, children, leaves in left-to-right order, path codes).
    Node 0 is the root. For k = 1 the tree is a root with one leaf.
    """
    if k == 1:
        return [-1, 0], [[1], []], [1], ["", "0"]
    size = 2 * k - 1
    parent = [-1] + [(i - 1) // 2 for i in range(1, size)]
    children = [[c for c in (2 * i + 1, 2 * i + 2) if c < size] for i in range(size)]
    codes = [""] * size
    for i in range(1, size):
        codes[i] = codes[parent[i]] + ("0" if i % 2 == 1 else "1")
    leaves = []
    stack = [0]
    while stack:  # pre-order with left child first visits leaves left to right
        i = stack.pop()
        if children[i]:
            stack.extend(reversed(children[i]))
        else:
            leaves.append(i)
    return parent, children, leaves, codes


@dataclass
class StarTreeGraph:
    """Transformed graph with provenance.

    ``edge_tree[i]`` is the original vertex whose tree holds edge i of
    ``network``; ``code[i]`` its left/right path string; ``mark[i]`` the
    degree of that vertex. Edges are stored child -> parent (towards the root).
    """

    graph: PlanarGraph
    network: Network
    source_n: int
    edge_vertex: dict
    edge_tree: np.ndarray
    code: list
    mark: np.ndarray
    # per original vertex: list of (neighbour u, index of the leaf edge)
    leaf_edges: list = field(default_factory=list)
    height: np.ndarray = None

    def root(self, v: int) -> int:
        return v

    def tree_vertices(self, v: int) -> list[int]:
        """Vertices of T_v (root, internal nodes and the shared leaves)."""
        mask = self.edge_tree == v
        e = self.network.edges[mask]
        return sorted(set(e.ravel().tolist()) | {v})

    def vertex_marks(self) -> np.ndarray:
        out = np.zeros(self.graph.n)
        np.maximum.at(out, self.network.edges[:, 0], self.mark)
        np.maximum.at(out, self.network.edges[:, 1], self.mark)
        return out


def star_tree_transform(g: PlanarGraph, planar: bool | None = None) -> StarTreeGraph:
    """Star-tree transform with resistances 1/deg(v) and marks deg(v) on T_v.

    For plane inputs leaves follow the rotation at v starting from its
    smallest neighbour; otherwise neighbour-id order. Isolated vertices keep
    a lone root.
    """
    n = g.n
    if planar is None:
        planar = g.is_connected() and g.is_plane() if n > 1 else True
    edges = g.edges()
    wmap = {}
    for i, (u, v) in enumerate(edges):
        wmap[(u, v)] = wmap[(v, u)] = n + i
    nxt = n + len(edges)
    rot = [[] for _ in range(nxt)]
    e_list, e_tree, e_code, e_mark, e_height = [], [], [], [], []
    leaf_edges = []
    for v in range(n):
        nbrs = list(g.rot[v])
        k = len(nbrs)
        if k == 0:
            leaf_edges.append([])
            continue
        if planar:
            s = nbrs.index(min(nbrs))
            nbrs = nbrs[s:] + nbrs[:s]
        else:
            nbrs = sorted(nbrs)
        parent, children, leaves, codes = _tree_shape(k)
        ids = [None] * len(parent)
        ids[0] = v
        for j, leaf in enumerate(leaves):
            ids[leaf] = wmap[(v, nbrs[j])]
        for i in range(1, len(parent)):
            if ids[i] is None:
                ids[i] = nxt
                rot.append([])
                nxt += 1
        # rotations: parent first, then children left to right; the root
        # lists its children in reverse so the cyclic leaf order matches rot[v]
        for i in range(len(parent)):
            kids = [ids[c] for c in children[i]]
            if i == 0:
                rot[v] = kids[::-1] if len(kids) > 1 else kids
            elif children[i]:
                rot[ids[i]] = [ids[parent[i]]] + kids[::-1]
        mine = []
        for i in range(1, len(parent)):
            e_list.append((ids[i], ids[parent[i]]))
            e_tree.append(v)
            e_code.append(codes[i])
            e_mark.append(k)
            e_height.append(len(codes[i]))
            if not children[i]:
                mine.append((nbrs[leaves.index(i)], len(e_list) - 1))
        leaf_edges.append(mine)
    # each edge vertex w_e hangs below exactly two trees
    for a, b in e_list:
        if n <= a < n + len(edges):
            rot[a].append(b)
    gd = PlanarGraph(rot, validate=False)
    mark = np.array(e_mark, dtype=float)
    net = Network(nxt, np.array(e_list, dtype=np.int64).reshape(-1, 2), 1.0 / mark if len(mark) else None, graph=None)
    return StarTreeGraph(gd, net, n, wmap, np.array(e_tree, dtype=np.int64), e_code, mark, leaf_edges,
                         np.array(e_height, dtype=np.int64))


@dataclass
class LiftResult:
    theta: Flow
    theta_prime: Flow
    theta_dagger: Flow
    energy: float
    energy_prime: float
    energy_dagger: float

    @property
    def ratio(self) -> float:
        return self.energy_dagger / self.energy if self.energy > 0 else math.nan


def lift_flow(g: PlanarGraph, theta: Flow, st: StarTreeGraph, tol: float = 1e-9) -> LiftResult:
    """Lift a flow on g (unit resistances) to G' and then to G-dagger.

    theta'(x, w_e) = theta'(w_e, y) = theta(x, y); on a tree edge pointing to
    the root, theta-dagger is the sum of theta'(v_j, v) over the leaves j
    below it, accumulated bottom-up so internal divergences vanish exactly.
    """
    if not theta.is_flow(tol):
        raise NetworkError("theta has non-zero divergence off its sources and sinks")
    n = g.n
    edges = g.edge_array()
    if theta.net.n != n or not np.array_equal(theta.net.edges, edges):
        raise NetworkError("theta must live on Network.from_graph(g)")
    vals = theta.values
    m = len(edges)
    # G': edge (u, w_e) and (w_e, v) for e = (u, v) with u < v
    gp, _ = subdivide(g)
    w = n + np.arange(m)
    e_prime = np.concatenate([np.stack([edges[:, 0], w], 1), np.stack([w, edges[:, 1]], 1)])
    net_prime = Network(n + m, e_prime, graph=gp)
    theta_prime = Flow(net_prime, np.concatenate([vals, vals]), theta.sources, theta.sinks)

    # inflow into v from neighbour u: theta(u, v)
    inflow = {}
    for i, (u, v) in enumerate(edges.tolist()):
        inflow[(u, v)] = vals[i]
        inflow[(v, u)] = -vals[i]
    net_d = st.network
    ed = net_d.edges
    dag = np.zeros(net_d.m)
    # child -> parent edges; process deepest first so parents sum their children
    child_edge = {}
    for i, (c, p) in enumerate(ed.tolist()):
        child_edge.setdefault(p, []).append(i)
    for v in range(n):
        for u, i in st.leaf_edges[v]:
            dag[i] = inflow[(u, v)]
    for i in np.argsort(-st.height, kind="stable"):
        c = ed[i, 0]
        if c < n or c >= n + m:  # not a shared leaf
            kids = child_edge.get(c, [])
            if kids:
                dag[i] = sum(dag[j] for j in kids if st.edge_tree[j] == st.edge_tree[i])
    src = frozenset(st.root(a) for a in theta.sources)
    snk = frozenset(st.root(z) for z in theta.sinks)
    theta_d = Flow(net_d, dag, src, snk)
    e0 = float(np.sum(vals ** 2))
    return LiftResult(theta, theta_prime, theta_d, e0, theta_prime.energy(), theta_d.energy())


class StarTreeTransformer(BaseEstimator):
    """``fit(g)`` builds the transform; ``transform(theta)`` lifts a flow."""

    def __init__(self, leaf_order="rotation"):
        self.leaf_order = leaf_order

    def fit(self, X, y=None):
        from ._validation import check_graph

        self.graph_ = check_graph(X)
        if self.leaf_order not in ("rotation", "index"):
            raise ValueError(f"leaf_order must be 'rotation' or 'index', got {self.leaf_order!r}")
        self.star_tree_ = star_tree_transform(self.graph_, planar=None if self.leaf_order == "rotation" else False)
        return self

    def transform(self, theta):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "star_tree_")
        return lift_flow(self.graph_, theta, self.star_tree_)


def exact_divergence_audit(g: PlanarGraph, theta: Flow, st: StarTreeGraph) -> bool:
    """Redo the lift in rational arithmetic and check divergences with no tolerance.

    Every float is an exact rational, so this certifies that theta-dagger is
    divergence-free at internal tree nodes and edge vertices, and that its
    divergence at each root w_v equals that of theta at v.
    """
    from fractions import Fraction

    n = g.n
    edges = g.edge_array().tolist()
    vals = [Fraction(x) for x in theta.values.tolist()]
    div_theta = [Fraction(0)] * n
    inflow = {}
    for (u, v), x in zip(edges, vals):
        div_theta[u] += x
        div_theta[v] -= x
        inflow[(u, v)] = x
        inflow[(v, u)] = -x
    ed = st.network.edges.tolist()
    dag = [Fraction(0)] * len(ed)
    for v in range(n):
        for u, i in st.leaf_edges[v]:
            dag[i] = inflow[(u, v)]
    kids = {}
    for i, (c, p) in enumerate(ed):
        kids.setdefault((p, int(st.edge_tree[i])), []).append(i)
    for i in np.argsort(-st.height, kind="stable").tolist():
        c = ed[i][0]
        if not n <= c < n + len(edges):
            below = kids.get((c, int(st.edge_tree[i])), [])
            if below:
                dag[i] = sum((dag[j] for j in below), Fraction(0))
    div = [Fraction(0)] * st.graph.n
    for (c, p), x in zip(ed, dag):
        div[c] += x
        div[p] -= x
    if any(div[v] != div_theta[v] for v in range(n)):
        return False
    if any(x != 0 for x in div[n:]):
        return False
    # the float lift must agree with the rational one up to rounding
    return bool(np.allclose(np.array([float(x) for x in dag]), lift_values(g, theta, st), rtol=0, atol=1e-12))


def lift_values(g: PlanarGraph, theta: Flow, st: StarTreeGraph) -> np.ndarray:
    return lift_flow(g, theta, st).theta_dagger.values
