"""Circle packings of finite triangulations and the geometry built on them."""

from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from sklearn.base import BaseEstimator

from .electric import INF, Network, effective_resistance
from .graph import GraphError, PlanarGraph

TWO_PI = 2.0 * math.pi


class PackingError(GraphError):
    pass


@dataclass
class CirclePacking:
    graph: PlanarGraph
    centers: np.ndarray
    radii: np.ndarray
    boundary: tuple = ()
    angle_error: float = 0.0
    n_iter: int = 0

    def tangency_error(self) -> float:
        e = self.graph.edge_array()
        if len(e) == 0:
            return 0.0
        d = np.linalg.norm(self.centers[e[:, 0]] - self.centers[e[:, 1]], axis=1)
        return float(np.max(np.abs(d - self.radii[e[:, 0]] - self.radii[e[:, 1]])))

    def overlap(self) -> float:
        """Largest amount by which two non-adjacent circles overlap (0 if none)."""
        from scipy.spatial import cKDTree

        tree = cKDTree(self.centers)
        rmax = float(self.radii.max())
        worst = 0.0
        for v in range(self.graph.n):
            near = tree.query_ball_point(self.centers[v], self.radii[v] + rmax)
            nb = set(self.graph.rot[v])
            for u in near:
                if u == v or u in nb:
                    continue
                d = np.linalg.norm(self.centers[u] - self.centers[v])
                worst = max(worst, self.radii[u] + self.radii[v] - d)
        return float(worst)

    def to_json(self) -> dict:
        return {"centers": self.centers.tolist(), "radii": self.radii.tolist()}

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)


# ---------------------------------------------------------------------------
# angle geometry of three mutually tangent circles


def corner_angles(ri, rj, rk):
    """Angle at the centre of circle i in the triangle of centres (i, j, k)."""
    return 2.0 * np.arctan2(np.sqrt(rj * rk), np.sqrt(ri * (ri + rj + rk)))


def _interior_faces(g: PlanarGraph, outer):
    outer_key = _face_key(outer)
    faces = []
    for f in g.faces():
        if _face_key(f) == outer_key:
            continue
        if len(f) != 3:
            raise PackingError("every inner face must be a triangle")
        faces.append(f)
    return np.array(faces, dtype=np.int64).reshape(-1, 3)


def _face_key(f):
    i = f.index(min(f))
    return tuple(f[i:] + f[:i])


def default_outer_face(g: PlanarGraph) -> list[int]:
    """The only non-triangular face if there is one, else the lexicographically smallest face."""
    faces = [_face_key(f) for f in g.faces()]
    big = [f for f in faces if len(f) != 3]
    if len(big) == 1:
        return list(big[0])
    if big:
        raise PackingError("more than one non-triangular face")
    return list(min(faces))


def angle_sums(faces, radii, n):
    corners = np.concatenate([faces, faces[:, [1, 2, 0]], faces[:, [2, 0, 1]]])
    ang = corner_angles(radii[corners[:, 0]], radii[corners[:, 1]], radii[corners[:, 2]])
    return np.bincount(corners[:, 0], weights=ang, minlength=n)


def _newton_step(faces, radii, interior_idx, n, err):
    """Solve J du = -err on interior log-radii; J[i, j] = inradius / (r_i + r_j)."""
    corners = np.concatenate([faces, faces[:, [1, 2, 0]], faces[:, [2, 0, 1]]])
    i, j, k = corners[:, 0], corners[:, 1], corners[:, 2]
    ri, rj, rk = radii[i], radii[j], radii[k]
    inr = np.sqrt(ri * rj * rk / (ri + rj + rk))
    wij = inr / (ri + rj)
    wik = inr / (ri + rk)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([j, k, i])
    vals = np.concatenate([wij, wik, -(wij + wik)])
    jac = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    jac = jac[interior_idx][:, interior_idx].tocsc()
    return spla.spsolve(-jac, err[interior_idx])


def pack_radii(faces, n, boundary, boundary_radii, tol=1e-8, max_iter=100_000, un_iter=200):
    """Radii with angle sum 2*pi at every non-boundary vertex.

    Uniform-neighbour sweeps with superstep extrapolation bring the radii
    close; Newton steps on log-radii (damped, error-monotone) finish.
    Returns (radii, max angle error, iterations).
    """
    interior = np.ones(n, dtype=bool)
    interior[list(boundary)] = False
    idx = np.flatnonzero(interior)
    radii = np.ones(n)
    radii[list(boundary)] = boundary_radii
    petals = np.bincount(faces.ravel(), minlength=n).astype(float)
    delta = np.sin(np.pi / np.maximum(petals, 3))

    def error(r):
        return angle_sums(faces, r, n) - TWO_PI

    err = error(radii)
    it = 0
    prev_change = None
    while it < min(un_iter, max_iter):
        e_max = np.max(np.abs(err[idx])) if len(idx) else 0.0
        if e_max <= tol or e_max < 1e-3:
            break
        theta = err + TWO_PI
        beta = np.sin(theta / (2.0 * petals))
        new = radii.copy()
        new[idx] = (radii * beta / (1.0 - beta) * (1.0 - delta) / delta)[idx]
        change = np.log(new[idx]) - np.log(radii[idx])
        if prev_change is not None:
            # superstep: extrapolate along a steady direction
            cos = change @ prev_change / (np.linalg.norm(change) * np.linalg.norm(prev_change) + 1e-300)
            if cos > 0.99:
                trial = radii.copy()
                trial[idx] = radii[idx] * np.exp(4.0 * change)
                t_err = error(trial)
                if np.max(np.abs(t_err[idx])) < e_max:
                    new = trial
        prev_change = change
        radii = new
        err = error(radii)
        it += 1
    while it < max_iter:
        e_max = np.max(np.abs(err[idx])) if len(idx) else 0.0
        if e_max <= tol:
            break
        du = _newton_step(faces, radii, idx, n, err)
        step = 1.0
        while True:
            trial = radii.copy()
            trial[idx] = radii[idx] * np.exp(step * du)
            t_err = error(trial)
            if np.max(np.abs(t_err[idx])) < e_max or step < 1e-6:
                break
            step *= 0.5
        radii, err = trial, t_err
        it += 1
    e_max = float(np.max(np.abs(err[idx]))) if len(idx) else 0.0
    return radii, e_max, it


def layout(g: PlanarGraph, faces, radii, root_edge=None):
    """Place centres face by face, breadth first from a root edge."""
    n = g.n
    third = {}
    for a, b, c in faces.tolist():
        third[(a, b)] = c
        third[(b, c)] = a
        third[(c, a)] = b
    if root_edge is None:
        a = 0
        b = g.rot[0][0]
        if (a, b) not in third:
            a, b = b, a
        root_edge = (a, b)
    a, b = root_edge
    z = np.full(n, np.nan, dtype=complex)
    z[a] = 0.0
    z[b] = radii[a] + radii[b]
    queue = deque([(a, b), (b, a)])
    done = set()
    while queue:
        u, v = queue.popleft()
        if (u, v) in done or (u, v) not in third:
            continue
        done.add((u, v))
        w = third[(u, v)]
        if np.isnan(z[w]):
            ang = corner_angles(radii[u], radii[v], radii[w])
            d = (z[v] - z[u]) / abs(z[v] - z[u])
            z[w] = z[u] + (radii[u] + radii[w]) * d * np.exp(1j * ang)
        for x, y in ((v, w), (w, u)):
            if (x, y) not in done:
                queue.append((x, y))
        for x, y in ((v, u), (w, v), (u, w)):
            if (x, y) not in done:
                queue.append((x, y))
    if np.any(np.isnan(z)):
        raise PackingError("layout did not reach every vertex")
    return np.stack([z.real, z.imag], axis=1)


def pack_triangulation(tri: PlanarGraph, boundary=None, boundary_radii=1.0, tol=1e-8,
                       max_iter=100_000) -> CirclePacking:
    """Circle packing of a triangulated disk with prescribed boundary radii.

    ``boundary`` is the outer face (default: see :func:`default_outer_face`);
    for a sphere triangulation it is one triangle. Every other face
    must be a triangle.
    """
    if not tri.simple:
        raise PackingError("packing needs a simple graph")
    if not tri.is_connected() or not tri.is_plane():
        raise PackingError("input is not a connected plane graph")
    outer = list(boundary) if boundary is not None else default_outer_face(tri)
    faces = _interior_faces(tri, outer)
    if len(faces) == 0:
        raise PackingError("no inner faces")
    n = tri.n
    b_r = np.broadcast_to(np.asarray(boundary_radii, dtype=float), (len(outer),))
    radii, e_max, it = pack_radii(faces, n, outer, b_r, tol=tol, max_iter=max_iter)
    if e_max > tol:
        raise PackingError(f"angle sums did not converge: error {e_max:.3e} after {it} iterations")
    centers = layout(tri, faces, radii)
    return CirclePacking(tri, centers, radii, tuple(outer), e_max, it)


class CirclePacker(BaseEstimator):
    """Estimator wrapper around :func:`pack_triangulation`.

    ``fit(tri)`` stores ``packing_``, ``radii_``, ``centers_`` and
    ``n_iter_``; ``transform`` returns centres normalised at a root.
    """

    def __init__(self, boundary_radius=1.0, tol=1e-8, max_iter=100_000, root=None):
        self.boundary_radius = boundary_radius
        self.tol = tol
        self.max_iter = max_iter
        self.root = root

    def fit(self, X, y=None, boundary=None):
        from ._validation import check_graph

        tri = check_graph(X)
        self.packing_ = pack_triangulation(tri, boundary, self.boundary_radius, self.tol, self.max_iter)
        self.radii_ = self.packing_.radii
        self.centers_ = self.packing_.centers
        self.n_iter_ = self.packing_.n_iter
        return self

    def transform(self, X=None):
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "packing_")
        root = 0 if self.root is None else self.root
        return normalize_at_root(self.packing_, root).centers

    def fit_transform(self, X, y=None, **kw):
        return self.fit(X, y, **kw).transform()


def normalize_at_root(p: CirclePacking, root: int) -> CirclePacking:
    """Similarity moving the root circle to the unit circle at the origin."""
    s = 1.0 / p.radii[root]
    centers = (p.centers - p.centers[root]) * s
    return CirclePacking(p.graph, centers, p.radii * s, p.boundary, p.angle_error, p.n_iter)


@dataclass
class RingAudit:
    ratio: float
    max_degree: int
    edge: tuple = ()


def ring_ratio_audit(p: CirclePacking) -> RingAudit:
    """Largest radius ratio across edges whose endpoints are both off the boundary."""
    e = p.graph.edge_array()
    bnd = np.zeros(p.graph.n, dtype=bool)
    bnd[list(p.boundary)] = True
    keep = ~bnd[e[:, 0]] & ~bnd[e[:, 1]]
    e = e[keep]
    interior_deg = p.graph.degrees[~bnd]
    dmax = int(interior_deg.max()) if len(interior_deg) else 0
    if len(e) == 0:
        return RingAudit(1.0, dmax)
    a, b = p.radii[e[:, 0]], p.radii[e[:, 1]]
    ratio = np.maximum(a / b, b / a)
    i = int(np.argmax(ratio))
    return RingAudit(float(ratio[i]), dmax, tuple(int(x) for x in e[i]))


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True)
class Disk:
    """Open disk |x - center| < radius."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def contains(self, pts):
        return np.linalg.norm(pts - np.asarray(self.center), axis=1) < self.radius


@dataclass(frozen=True)
class Annulus:
    """inner <= |x - center| < outer."""

    center: tuple = (0.0, 0.0)
    inner: float = 1.0
    outer: float = 2.0

    def contains(self, pts):
        d = np.linalg.norm(pts - np.asarray(self.center), axis=1)
        return (d >= self.inner) & (d < self.outer)


@dataclass(frozen=True)
class Complement:
    region: object = None

    def contains(self, pts):
        if self.region is None:
            return np.zeros(len(pts), dtype=bool)
        return ~self.region.contains(pts)


@dataclass(frozen=True)
class Plane:
    def contains(self, pts):
        return np.ones(len(pts), dtype=bool)


def vertices_in_region(p: CirclePacking, region) -> np.ndarray:
    """Vertices whose circle centres lie in ``region``."""
    return np.flatnonzero(region.contains(p.centers))


@dataclass
class AnnulusProfile:
    radii: np.ndarray
    annulus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cumulative: np.ndarray = field(default_factory=lambda: np.zeros(0))


def annulus_resistance_profile(p: CirclePacking, net: Network, center=(0.0, 0.0), radii=(1, 2, 4)) -> AnnulusProfile:
    """Resistances across consecutive annuli and from the innermost disk outwards.

    ``annulus[i]`` is Reff(V_B(c, r_i) <-> V outside B(c, r_{i+1})) and
    ``cumulative[i]`` is Reff(V_B(c, r_0) <-> V outside B(c, r_{i+1})).
    Empty sides give +inf.
    """
    radii = np.asarray(radii, dtype=float)
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    inside = [vertices_in_region(p, Disk(tuple(center), r)) for r in radii]
    outside = [vertices_in_region(p, Complement(Disk(tuple(center), r))) for r in radii]
    ann = np.array([effective_resistance(net, inside[i], outside[i + 1]) if len(inside[i]) and len(outside[i + 1])
                    else INF for i in range(len(radii) - 1)])
    cum = np.array([effective_resistance(net, inside[0], outside[i + 1]) if len(inside[0]) and len(outside[i + 1])
                    else INF for i in range(len(radii) - 1)])
    return AnnulusProfile(radii, ann, cum)


def cut_constant(p: CirclePacking, center=(0.0, 0.0), r_min=1.0) -> float:
    """Smallest C with no edge from V_B(c, r) to V outside B(c, C r) for all r >= r_min."""
    e = p.graph.edge_array()
    d = np.linalg.norm(p.centers - np.asarray(center), axis=1)
    lo = np.minimum(d[e[:, 0]], d[e[:, 1]])
    hi = np.maximum(d[e[:, 0]], d[e[:, 1]])
    # an edge crosses from B(r) to outside B(Cr) iff lo < r and hi >= C r for some r >= r_min
    lo = np.maximum(lo, r_min)
    mask = hi >= lo
    if not np.any(mask):
        return 1.0
    return float(max(1.0, np.max(hi[mask] / lo[mask])))


def lattice_packing(coords: np.ndarray, graph: PlanarGraph, spacing: float = 1.0, boundary=()) -> CirclePacking:
    """Equal circles of radius spacing/2 at lattice sites (tangency graph = nearest neighbours)."""
    radii = np.full(len(coords), spacing / 2.0)
    return CirclePacking(graph, np.asarray(coords, dtype=float), radii, tuple(boundary))
