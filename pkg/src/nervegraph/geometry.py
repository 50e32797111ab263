"""Euclidean primitives in R^2 and R^3.

Everything here is a pure function of its inputs. Points are rows of float
arrays; a configuration of ``n`` points in ``R^d`` is an ``(n, d)`` array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import Delaunay, QhullError

from nervegraph import kernels
from nervegraph._kernels_py import _circumball, miniball

EPS_GEOM = 1e-9
SUPPORTED_DIMS = (2, 3)


class GeometryError(ValueError):
    """Raised for invalid or degenerate geometric input."""


class DegenerateInputError(GeometryError):
    """All input points are affinely dependent (e.g. collinear in the plane)."""


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        if self.radius < 0:
            raise GeometryError(f"negative radius {self.radius}")

    def contains(self, p, tol: float = EPS_GEOM) -> bool:
        return bool(np.linalg.norm(np.asarray(p, float) - self.center) <= self.radius + tol)


@dataclass(frozen=True)
class Triangulation:
    """Top simplices of a Delaunay triangulation, as sorted 0-based index tuples."""

    vertices: np.ndarray
    simplices: tuple


def as_points(points, dims=None) -> np.ndarray:
    P = np.asarray(points, dtype=float)
    if P.ndim == 1:
        P = P[None, :]
    if P.ndim != 2:
        raise GeometryError(f"expected an (n, d) array, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise GeometryError("non-finite coordinates")
    if dims is not None and P.shape[1] not in dims:
        raise GeometryError(f"dimension {P.shape[1]} not supported (allowed: {dims})")
    return P


def distance(a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise GeometryError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def pairwise_distances(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    diff = P[:, None, :] - P[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def min_enclosing_ball(points) -> Ball:
    """Smallest closed ball containing every point (move-to-front Welzl)."""
    P = as_points(points)
    if P.shape[0] == 0:
        raise GeometryError("min_enclosing_ball needs at least one point")
    center, radius = miniball(P)
    return Ball(np.asarray(center, float), float(radius))


def miniball_radius(points) -> float:
    """Radius of :func:`min_enclosing_ball`, via the compiled kernel when present."""
    P = as_points(points)
    if P.shape[0] == 0:
        raise GeometryError("min_enclosing_ball needs at least one point")
    return float(kernels.miniball_radius(P))


def balls_intersect(centers, r: float) -> bool:
    """Whether the closed balls of radius ``r`` around ``centers`` share a point."""
    if r <= 0:
        raise GeometryError(f"radius must be positive, got {r}")
    return miniball_radius(centers) <= r


def circumball(points) -> Ball:
    """Smallest ball having every given point on its boundary.

    For ``k <= d+1`` affinely independent points this is the circumscribed
    ball with center in their affine hull.
    """
    P = as_points(points)
    center, radius = _circumball(list(P))
    return Ball(np.asarray(center, float), float(radius))


def _check_general_position(P: np.ndarray) -> None:
    n, d = P.shape
    if n < d + 1:
        raise DegenerateInputError(f"need at least {d + 1} points in R^{d}, got {n}")
    centered = P - P.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[-1] <= EPS_GEOM * max(1.0, sv[0]):
        raise DegenerateInputError("points are affinely dependent")


def delaunay(points, d: int | None = None) -> Triangulation:
    """Delaunay triangulation of a point set in R^2 or R^3.

    Cocircular (cospherical) ties are resolved by Qhull's triangulated output,
    which is deterministic for a given input.
    """
    P = as_points(points, SUPPORTED_DIMS)
    if d is not None and P.shape[1] != d:
        raise GeometryError(f"points have dimension {P.shape[1]}, expected {d}")
    _check_general_position(P)
    try:
        tri = Delaunay(P, qhull_options="Qt Qbb Qc Qz Q12")
    except QhullError as exc:
        raise DegenerateInputError(str(exc)) from exc
    simplices = tuple(sorted({tuple(sorted(int(i) for i in s)) for s in tri.simplices}))
    return Triangulation(P, simplices)


def empty_circumball(P: np.ndarray, simplex, tol: float = EPS_GEOM) -> bool:
    """True if no point of ``P`` lies strictly inside the circumball of ``simplex``."""
    ball = circumball(P[list(simplex)])
    dist = np.linalg.norm(P - ball.center, axis=1)
    others = np.ones(len(P), dtype=bool)
    others[list(simplex)] = False
    return bool(np.all(dist[others] >= ball.radius - tol))
