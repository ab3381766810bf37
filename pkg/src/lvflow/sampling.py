"""Sampling utilities for building surrogate training inputs.

Provides uniform sampling inside convex regions (volume-weighted simplex
choice plus Dirichlet barycentric weights) and space-filling
distance-maximizing sampling with a fractional Minkowski metric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class DegenerateRegionError(ValueError):
    """Raised when a sampling region has no volume."""


@dataclass(frozen=True)
class ConvexRegion:
    """A convex set decomposed into simplices for uniform sampling.

    ``vertices`` has shape (M, d); each row of ``simplices`` holds d+1
    vertex indices.  The decomposition here is a fan triangulation from
    the centroid, which is sufficient for the intervals and convex
    polygons this package uses; uniformity of the sampler depends only
    on the volume weighting, not on the decomposition.
    """

    vertices: np.ndarray
    simplices: np.ndarray
    volumes: np.ndarray

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def volume(self) -> float:
        return float(self.volumes.sum())

    @classmethod
    def from_interval(cls, lo: float, hi: float) -> "ConvexRegion":
        if not hi > lo:
            raise DegenerateRegionError(f"empty interval [{lo}, {hi}]")
        vertices = np.array([[lo], [hi]], dtype=float)
        return cls(vertices, np.array([[0, 1]]), np.array([hi - lo]))

    @classmethod
    def from_polygon(cls, points) -> "ConvexRegion":
        """Build a 2-D region from the vertices of a convex polygon.

        Vertex order is normalized by sorting around the centroid, so the
        input order does not matter.
        """
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
            raise ValueError("polygon needs at least 3 points of dimension 2")
        centroid = pts.mean(axis=0)
        order = np.argsort(np.arctan2(pts[:, 1] - centroid[1], pts[:, 0] - centroid[0]))
        pts = pts[order]
        n = pts.shape[0]
        vertices = np.vstack([pts, centroid[None, :]])
        simplices = np.array([[i, (i + 1) % n, n] for i in range(n)])
        volumes = np.array(
            [_simplex_volume(vertices[s]) for s in simplices], dtype=float
        )
        keep = volumes > 0.0
        if not keep.any():
            raise DegenerateRegionError("polygon has zero area")
        return cls(vertices, simplices[keep], volumes[keep])

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        """Vectorized point-in-region test (convexity assumed)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.dim == 1:
            lo, hi = self.vertices.min(), self.vertices.max()
            return (pts[:, 0] >= lo - tol) & (pts[:, 0] <= hi + tol)
        # Half-plane test against the hull edges (2-D fan regions).
        hull = self.vertices[:-1]
        inside = np.ones(pts.shape[0], dtype=bool)
        n = hull.shape[0]
        for i in range(n):
            a, b = hull[i], hull[(i + 1) % n]
            edge = b - a
            cross = edge[0] * (pts[:, 1] - a[1]) - edge[1] * (pts[:, 0] - a[0])
            inside &= cross >= -tol * max(1.0, float(np.abs(edge).max()))
        return inside


def _simplex_volume(verts: np.ndarray) -> float:
    d = verts.shape[1]
    mat = verts[1:] - verts[0]
    return abs(float(np.linalg.det(mat))) / float(math.factorial(d))


@dataclass(frozen=True)
class ProductRegion:
    """Cartesian product of convex factor regions, sampled factor-wise."""

    factors: tuple

    @property
    def dim(self) -> int:
        return sum(f.dim for f in self.factors)

    def contains(self, points, tol: float = 1e-9) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.ones(pts.shape[0], dtype=bool)
        offset = 0
        for f in self.factors:
            inside &= f.contains(pts[:, offset : offset + f.dim], tol=tol)
            offset += f.dim
        return inside


def sample_convex(region: ConvexRegion, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` uniform points inside a convex region.

    Picks a simplex with probability proportional to its volume, then a
    uniform Dirichlet weight vector over its vertices.
    """
    if region.volume <= 0.0:
        raise DegenerateRegionError("cannot sample a zero-volume region")
    probs = region.volumes / region.volumes.sum()
    chosen = rng.choice(len(region.simplices), size=n, p=probs)
    weights = rng.dirichlet(np.ones(region.dim + 1), size=n)
    corners = region.vertices[region.simplices[chosen]]  # (n, d+1, d)
    return np.einsum("nk,nkd->nd", weights, corners)


def _sample_uniform(region, n: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(region, ProductRegion):
        return np.hstack([_sample_uniform(f, n, rng) for f in region.factors])
    return sample_convex(region, n, rng)


def default_minkowski_exponent(dim: int) -> float:
    """Rule-of-thumb fractional exponent 4**(-d) for a d-dimensional domain."""
    return 4.0 ** (-dim)


def minkowski_dist(x, y, p: float) -> float:
    """Minkowski distance (sum |x_i - y_i|^p)^(1/p); p may lie in (0, 1).

    For very small p the result can overflow to inf even though the
    ordering of distances is well defined; comparisons inside this module
    therefore use log-distances.
    """
    if p <= 0.0:
        raise ValueError(f"Minkowski exponent must be positive, got {p}")
    diff = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    return float(np.sum(diff**p) ** (1.0 / p))


def _log_min_dist(candidates: np.ndarray, accepted: np.ndarray, p: float) -> np.ndarray:
    """log of min Minkowski distance from each candidate to the accepted set."""
    diff = np.abs(candidates[:, None, :] - accepted[None, :, :])
    s = np.sum(diff**p, axis=-1)  # (K, n_accepted)
    s_min = s.min(axis=1)
    with np.errstate(divide="ignore"):
        return np.log(s_min) / p


@dataclass(frozen=True)
class SampleSet:
    """Result of distance-maximizing sampling."""

    points: np.ndarray
    p: float
    rng_seed: int | None = field(default=None)


def sample_distance_maximizing(
    region,
    n: int,
    k: int = 32,
    rng: np.random.Generator | int | None = None,
    p: float | None = None,
) -> SampleSet:
    """Best-candidate sampling: each new point maximizes its minimum
    Minkowski distance to the points already accepted.

    ``k`` candidates are drawn uniformly per accepted point; ties are
    broken by the lowest candidate index.
    """
    if n < 1 or k < 1:
        raise ValueError("need n >= 1 and k >= 1")
    seed = rng if isinstance(rng, int) else None
    gen = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    if p is None:
        p = default_minkowski_exponent(region.dim)
    points = np.empty((n, region.dim), dtype=float)
    points[0] = _sample_uniform(region, 1, gen)[0]
    for i in range(1, n):
        candidates = _sample_uniform(region, k, gen)
        log_d = _log_min_dist(candidates, points[:i], p)
        points[i] = candidates[int(np.argmax(log_d))]
    return SampleSet(points=points, p=p, rng_seed=seed)
