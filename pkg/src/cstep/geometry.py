"""Planar convex hulls, areas, density clustering and a Monte Carlo union area."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractViolation


@dataclass(frozen=True)
class ConvexPolygon:
    """Counter-clockwise vertices without repeats; fewer than 3 means area 0."""

    vertices: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    def __post_init__(self):
        object.__setattr__(self, "vertices", np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2))

    def __len__(self):
        return self.vertices.shape[0]

    @property
    def degenerate(self) -> bool:
        return len(self) < 3

    def bbox(self):
        if len(self) == 0:
            return None
        lo = self.vertices.min(axis=0)
        hi = self.vertices.max(axis=0)
        return lo, hi

    def contains(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        return kernels._pykernels._inside_convex(pts[:, 0], pts[:, 1], self.vertices)

    def to_list(self) -> list:
        return self.vertices.tolist()


def convex_hull(points) -> ConvexPolygon:
    """Andrew's monotone chain. Collinear and duplicate points are dropped."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] == 0:
        return ConvexPolygon()
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    verts = kernels.hull_sorted(np.ascontiguousarray(pts[order]))
    if verts.shape[0] == 2 and np.array_equal(verts[0], verts[1]):
        verts = verts[:1]
    return ConvexPolygon(verts)


def polygon_area(poly: ConvexPolygon) -> float:
    """Shoelace area."""
    v = poly.vertices
    if v.shape[0] < 3:
        return 0.0
    x = v[:, 0]
    y = v[:, 1]
    s = np.dot(x[:-1], y[1:]) - np.dot(y[:-1], x[1:]) + x[-1] * y[0] - y[-1] * x[0]
    return float(abs(s) * 0.5)


def dbscan(points, eps: float, min_pts: int) -> np.ndarray:
    """Density clustering; returns labels with ``-1`` for noise and ids from 0."""
    if not eps > 0:
        raise ContractViolation("eps must be > 0")
    if min_pts < 1:
        raise ContractViolation("min_pts must be >= 1")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    return kernels.dbscan(np.ascontiguousarray(pts), float(eps), int(min_pts))


@dataclass(frozen=True)
class UnionEstimate:
    area: float
    labels: np.ndarray
    hulls: tuple


def cluster_hulls(points, labels) -> tuple:
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n_clusters = int(labels.max()) + 1 if labels.size else 0
    return tuple(convex_hull(pts[labels == k]) for k in range(n_clusters))


def _covers(outer: ConvexPolygon, inner: ConvexPolygon) -> bool:
    if outer.degenerate:
        return False
    (olo, ohi), (ilo, ihi) = outer.bbox(), inner.bbox()
    if np.any(ilo < olo) or np.any(ihi > ohi):
        return False
    return bool(np.all(outer.contains(inner.vertices)))


def union_of_cluster_hulls(terminal_points, eps: float, min_pts: int, clip_to: ConvexPolygon,
                           mc_samples: int, rng: np.random.Generator) -> UnionEstimate:
    """Cluster, hull each cluster, and estimate ``area(union(hulls) & clip_to)``.

    ``mc_samples`` points are drawn uniformly over the bounding box of
    ``clip_to`` from a splitmix64 stream seeded by one draw from ``rng``.
    A hull that covers ``clip_to`` short-circuits to the exact clip area.
    """
    if mc_samples < 1:
        raise ContractViolation("mc_samples must be >= 1")
    pts = np.asarray(terminal_points, dtype=np.float64).reshape(-1, 2)
    clip_area = polygon_area(clip_to)
    if pts.shape[0] == 0:
        return UnionEstimate(0.0, np.empty(0, dtype=np.int64), ())
    labels = dbscan(pts, eps, min_pts)
    hulls = cluster_hulls(pts, labels)
    solid = [h for h in hulls if not h.degenerate]
    if not solid or clip_area == 0.0:
        return UnionEstimate(0.0, labels, hulls)
    if any(_covers(h, clip_to) for h in solid):
        return UnionEstimate(clip_area, labels, hulls)
    lo, hi = clip_to.bbox()
    seed = int(rng.integers(0, 2**63))
    verts = np.concatenate([h.vertices for h in solid])
    offsets = np.cumsum([0] + [len(h) for h in solid]).astype(np.intp)
    hits = kernels.mc_union_count(seed, int(mc_samples), lo, hi, clip_to.vertices, verts, offsets)
    box_area = float((hi[0] - lo[0]) * (hi[1] - lo[1]))
    area = min(box_area * hits / mc_samples, clip_area)
    return UnionEstimate(float(area), labels, hulls)


def union_area_of_cluster_hulls(terminal_points, eps: float, min_pts: int, clip_to: ConvexPolygon,
                                mc_samples: int, rng: np.random.Generator) -> float:
    return union_of_cluster_hulls(terminal_points, eps, min_pts, clip_to, mc_samples, rng).area
