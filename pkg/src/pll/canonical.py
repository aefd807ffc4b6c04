"""Canonical codes for rooted graphs and the local (ball) metric.

The rooted graph is split along its block-cut tree. Each block is
canonicalised by colour refinement from the distance-to-attach-vertex
colouring followed by an individualisation/refinement search; search
subtrees are skipped when a discovered automorphism fixing the current
prefix maps them onto an explored one. Block codes are then folded
bottom-up, so tree-like parts never enter the search.
"""

from __future__ import annotations

from fractions import Fraction

import networkx as nx

from .graph import Ball, GraphError, RootedGraph, ball

MAX_CODE_VERTICES = 10_000


class CodeSizeError(GraphError):
    pass


def _refine(adj, colors):
    """Equitable refinement. Colours are ranks 0..k-1; ordering is canonical."""
    n = len(adj)
    ncolors = len(set(colors))
    while True:
        sigs = [(colors[v], tuple(sorted(colors[u] for u in adj[v]))) for v in range(n)]
        ranks = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        k = len(ranks)
        if k == ncolors:
            return new
        colors, ncolors = new, k


def _individualize(colors, w):
    keyed = [(c, 0 if v == w else 1) for v, c in enumerate(colors)]
    ranks = {s: i for i, s in enumerate(sorted(set(keyed)))}
    return [ranks[s] for s in keyed]


def _target_cell(colors):
    cells = {}
    for v, c in enumerate(colors):
        cells.setdefault(c, []).append(v)
    best = None
    for c in sorted(cells):
        cell = cells[c]
        if len(cell) > 1 and (best is None or len(cell) < len(best)):
            best = cell
    return best


def _leaf_code(adj, colors):
    edges = []
    for v, nb in enumerate(adj):
        cv = colors[v]
        for u in nb:
            cu = colors[u]
            if cv < cu:
                edges.append((cv, cu))
    edges.sort()
    return tuple(edges)


class _Orbits:
    """Union-find of orbits of the group generated by a set of permutations."""

    def __init__(self, n, gens):
        self.parent = list(range(n))
        for g in gens:
            for v, w in enumerate(g):
                self.union(v, w)

    def find(self, v):
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


def _split_twins(adj, colors, open_nb, closed_nb):
    """Break up every cell made of pairwise twins, without branching.

    Swapping two twins is an automorphism fixing everything else, so the
    order in which they are individualised cannot change the code.
    """
    while True:
        cells = {}
        for v, c in enumerate(colors):
            cells.setdefault(c, []).append(v)
        offset = {}
        for c, cell in cells.items():
            if len(cell) < 2:
                continue
            if all(open_nb[v] == open_nb[cell[0]] for v in cell) or all(
                closed_nb[v] == closed_nb[cell[0]] for v in cell
            ):
                for i, v in enumerate(cell):
                    offset[v] = i
        if not offset:
            return colors
        colors = _refine(adj, _rank([(c, offset.get(v, 0)) for v, c in enumerate(colors)]))


def _search(adj, colors):
    n = len(adj)
    open_nb = [frozenset(a) for a in adj]
    closed_nb = [frozenset(a) | {v} for v, a in enumerate(adj)]
    best = {"code": None, "labels": None, "path": ()}
    autos = []

    def visit(colors, prefix):
        # returns None, or a depth L meaning "abandon every node of depth >= L"
        colors = _split_twins(adj, _refine(adj, colors), open_nb, closed_nb)
        cell = _target_cell(colors)
        if cell is None:
            code = _leaf_code(adj, colors)
            if best["code"] is None or code < best["code"]:
                best.update(code=code, labels=colors, path=prefix)
                return None
            if code == best["code"]:
                inv = [0] * n
                for v, c in enumerate(best["labels"]):
                    inv[c] = v
                autos.append([inv[colors[v]] for v in range(n)])
                # the automorphism maps this subtree below the common
                # ancestor onto the (finished) one holding the best leaf
                common = 0
                for x, y in zip(prefix, best["path"]):
                    if x != y:
                        break
                    common += 1
                return common + 1
            return None
        depth = len(prefix)
        explored = []
        for w in cell:
            if explored:
                fixing = [g for g in autos if all(g[p] == p for p in prefix)]
                if fixing:
                    orb = _Orbits(n, fixing)
                    rw = orb.find(w)
                    if any(orb.find(x) == rw for x in explored):
                        continue
            explored.append(w)
            jump = visit(_individualize(colors, w), prefix + (w,))
            if jump is not None and jump <= depth:
                return jump
        return None

    visit(colors, ())
    return best["code"]


def _block_code(adj_block, attach, child_codes):
    """Canonical string of one block rooted at ``attach``.

    ``child_codes[i]`` encodes whatever hangs off local vertex i outside the
    block; it enters the initial colouring together with the distance to
    the attach vertex.
    """
    nb = len(adj_block)
    dist = _bfs(adj_block, attach)
    start = [(dist[v], child_codes[v]) for v in range(nb)]
    colors0 = _refine(adj_block, _rank(start))
    edges = _search(adj_block, colors0)
    table = {}
    for v in range(nb):
        table[colors0[v]] = child_codes[v]
    parts = [f"B{nb};", ",".join(f"{a}.{b}" for a, b in edges), ";"]
    for c in range(len(table)):
        h = table[c]
        parts.append(f"{len(h)}:{h}")
    return "".join(parts)


def _bfs(adj, s):
    dist = [-1] * len(adj)
    dist[s] = 0
    q = [s]
    for v in q:
        for u in adj[v]:
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                q.append(u)
    return dist


def _rooted_component_code(adj, root):
    """Code of the component of ``root`` via its block-cut tree.

    Each block is canonicalised by refinement + search with the codes of the
    subtrees hanging at its vertices as colours; subtrees are assembled
    bottom-up (an AHU-style fold over the block-cut tree).
    """
    comp = [v for v, d in enumerate(_bfs(adj, root)) if d >= 0]
    if len(comp) == 1:
        return "V"
    g = nx.Graph()
    g.add_nodes_from(comp)
    for v in comp:
        for u in adj[v]:
            if v < u:
                g.add_edge(v, u)
    blocks = [sorted(b) for b in nx.biconnected_components(g)]
    at = {}
    for i, b in enumerate(blocks):
        for v in b:
            at.setdefault(v, []).append(i)
    # orient the block-cut tree away from the root
    parent_of_block = {}
    order = []  # (block, attach vertex) in BFS order
    seen_vertex = {root}
    frontier = [root]
    for v in frontier:
        for bi in at[v]:
            if bi in parent_of_block:
                continue
            parent_of_block[bi] = v
            order.append(bi)
            for w in blocks[bi]:
                if w not in seen_vertex:
                    seen_vertex.add(w)
                    frontier.append(w)
    children = {v: [] for v in comp}
    for bi in order:
        children[parent_of_block[bi]].append(bi)
    vcode = {}
    bcode = {}
    for bi in reversed(order):
        b = blocks[bi]
        att = parent_of_block[bi]
        for w in b:
            if w != att and w not in vcode:
                vcode[w] = _vertex_code([bcode[c] for c in children[w]])
        local = {v: i for i, v in enumerate(b)}
        adj_b = [[local[u] for u in adj[v] if u in local] for v in b]
        codes = ["" if v == att else vcode[v] for v in b]
        bcode[bi] = _block_code(adj_b, local[att], codes)
    return _vertex_code([bcode[c] for c in children[root]])


def _vertex_code(block_codes):
    return "(" + "".join(f"{len(c)}:{c}" for c in sorted(block_codes)) + ")"


def canonical_code(g: RootedGraph, max_vertices: int = MAX_CODE_VERTICES) -> bytes:
    """Byte string that is equal for two rooted graphs iff they are rooted-isomorphic.

    Comparison is of abstract rooted graphs; the rotation system is ignored.
    Components not containing the root are encoded as unrooted components
    (minimum over their possible roots).
    """
    graph = g.graph
    n = graph.n
    if n > max_vertices:
        raise CodeSizeError(f"graph has {n} vertices, cap is {max_vertices}")
    adj = [list(r) for r in graph.rot]
    code = _rooted_component_code(adj, g.root)
    labels = graph.components()
    others = []
    for c in sorted(set(labels.tolist()) - {int(labels[g.root])}):
        members = [int(v) for v in (labels == c).nonzero()[0]]
        others.append(min(_rooted_component_code(adj, v) for v in members))
    if others:
        code = code + "|" + "".join(f"{len(c)}:{c}" for c in sorted(others))
    return code.encode("ascii")


def _rank(values):
    ranks = {s: i for i, s in enumerate(sorted(set(values)))}
    return [ranks[s] for s in values]


def code_hex(g: RootedGraph) -> str:
    return canonical_code(g).hex()


def rooted_distance(g1: RootedGraph, g2: RootedGraph) -> Fraction:
    """``1/(alpha+1)`` with alpha the largest r whose r-balls are isomorphic.

    For :class:`Ball` inputs the comparison stops at the smaller radius
    budget; full rooted graphs are compared up to their eccentricities and
    get distance 0 when isomorphic.
    """
    budgets = []
    for g in (g1, g2):
        if isinstance(g, Ball):
            budgets.append(g.radius)
    ecc = max(int(g1.graph.distances(g1.root).max()), int(g2.graph.distances(g2.root).max()))
    limit = min(budgets) if budgets else ecc
    alpha = 0
    for r in range(1, limit + 1):
        if canonical_code(ball(g1, r)) != canonical_code(ball(g2, r)):
            return Fraction(1, alpha + 1)
        alpha = r
    if not budgets:
        return Fraction(0)
    return Fraction(1, alpha + 1)
