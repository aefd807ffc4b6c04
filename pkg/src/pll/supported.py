"""(delta, s)-supported points of a planar point cloud."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

# points at distance <= radius * (1 + _EDGE) count as covered, so circles
# through two points (which sit exactly on the rim) cover both
_EDGE = 1e-9


class PointCloud:
    """Distinct points in the plane with cached isolation radii."""

    def __init__(self, points):
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) < 1:
            raise ValueError("empty point cloud")
        self.points = pts
        self.tree = cKDTree(pts)
        if len(pts) > 1:
            d, _ = self.tree.query(pts, k=2)
            self.isolation = d[:, 1]
            if np.any(self.isolation <= 0):
                raise ValueError("points must be distinct")
        else:
            self.isolation = np.array([math.inf])

    def __len__(self):
        return len(self.points)


@dataclass
class SupportedResult:
    count: int
    witnesses: list
    # per point: points in the big ball, best disk coverage, leftovers
    in_ball: np.ndarray
    coverage: np.ndarray


def _check_args(delta, s):
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if int(s) != s or s < 2:
        raise ValueError("s must be an integer >= 2")


def max_disk_coverage(pts: np.ndarray, radius: float) -> int:
    """Largest number of ``pts`` inside one closed disk of the given radius.

    Some optimal disk either is centred at a point or has two points on its
    rim, so those candidate centres suffice.
    """
    if len(pts) == 0:
        return 0
    tree = cKDTree(pts)
    cands = [pts]
    pairs = tree.query_pairs(2.0 * radius * (1 + _EDGE), output_type="ndarray")
    if len(pairs):
        p, q = pts[pairs[:, 0]], pts[pairs[:, 1]]
        mid = 0.5 * (p + q)
        d = q - p
        half = 0.5 * np.linalg.norm(d, axis=1)
        h = np.sqrt(np.maximum(radius * radius - half * half, 0.0))
        normal = np.stack([-d[:, 1], d[:, 0]], axis=1) / (2.0 * half[:, None])
        cands += [mid + h[:, None] * normal, mid - h[:, None] * normal]
    cands = np.concatenate(cands)
    counts = tree.query_ball_point(cands, radius * (1 + _EDGE), return_length=True)
    return int(np.max(counts))


def grid_disk_coverage(pts: np.ndarray, radius: float, pitch: float, origin=(0.0, 0.0)) -> int:
    """Best coverage over disk centres restricted to a square grid of the given pitch."""
    if len(pts) == 0:
        return 0
    o = np.asarray(origin, dtype=float)
    k = int(math.ceil(radius / pitch)) + 1
    offs = np.arange(-k, k + 1)
    ox, oy = np.meshgrid(offs, offs, indexing="ij")
    stencil = np.stack([ox.ravel(), oy.ravel()], axis=1)
    # only grid nodes within reach of some point can cover anything
    base = np.round((pts - o) / pitch).astype(np.int64)
    cells = np.unique((base[:, None, :] + stencil[None, :, :]).reshape(-1, 2), axis=0)
    centres = o + cells * pitch
    counts = cKDTree(pts).query_ball_point(centres, radius * (1 + _EDGE), return_length=True)
    return int(np.max(counts))


def supported_points(cloud: PointCloud, delta: float, s: int, oracle: str = "exact") -> SupportedResult:
    """Count points w for which every disk of radius delta*rho_w leaves >= s
    points of the cloud inside B(w, rho_w/delta).

    ``oracle="grid"`` restricts disk centres to a grid of pitch delta*rho_w/8
    (a lower bound on the best coverage, so an upper bound on the count).
    """
    _check_args(delta, s)
    n = len(cloud)
    in_ball = np.zeros(n, dtype=np.int64)
    cover = np.zeros(n, dtype=np.int64)
    witnesses = []
    if n < 2:
        return SupportedResult(0, [], in_ball, cover)
    for w in range(n):
        rho = cloud.isolation[w]
        idx = cloud.tree.query_ball_point(cloud.points[w], rho / delta)
        local = cloud.points[idx] - cloud.points[w]
        in_ball[w] = len(idx)
        if len(idx) < s:
            continue
        if oracle == "exact":
            cover[w] = max_disk_coverage(local, delta * rho)
        elif oracle == "grid":
            cover[w] = grid_disk_coverage(local, delta * rho, delta * rho / 8.0)
        else:
            raise ValueError(f"unknown oracle {oracle!r}")
        if in_ball[w] - cover[w] >= s:
            witnesses.append(w)
    return SupportedResult(len(witnesses), witnesses, in_ball, cover)


def lemma_bound_shape(n: int, delta: float, s: int) -> float:
    """|C| delta^-2 log(1/delta) / s; the count should stay below A times this."""
    return n * delta ** -2 * math.log(1.0 / delta) / s
