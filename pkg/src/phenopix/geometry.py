"""Planar polygon operations shared by measurement and evaluation code.

Coordinate convention: image coordinates, x grows right and y grows down.
Pixel (i, j) covers the unit square [i, i+1) x [j, j+1); its center is
(i + 0.5, j + 0.5). Raster grids are numpy arrays indexed [row, col] = [y, x].

A positive rotation angle is counter-clockwise in standard math orientation,
which appears clockwise on screen because y grows downward. Every module that
rotates anything derives its sign from this convention.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np


@dataclass
class PolygonMask:
    """Closed polygon contour. The edge from the last vertex back to the
    first is implicit; the closing vertex must not be repeated."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("polygon vertices must form an (n, 2) sequence")
        if v.shape[0] < 3:
            raise ValueError("polygon needs at least 3 vertices")
        ring = np.vstack([v, v[:1]])
        if np.any(np.all(ring[1:] == ring[:-1], axis=1)):
            raise ValueError("polygon has two identical consecutive vertices")
        if _shoelace(v) == 0.0:
            raise ValueError("polygon has zero area")
        self.vertices = v

    def __len__(self):
        return len(self.vertices)


def _shoelace(v: np.ndarray) -> float:
    """Signed shoelace area (positive for counter-clockwise vertex order)."""
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _edges(v: np.ndarray):
    return v, np.roll(v, -1, axis=0)


def _is_simple(v: np.ndarray) -> bool:
    """True when no two non-adjacent edges properly cross.

    Touching vertices and collinear overlaps do not count as crossings, so
    self-touching contours from annotation tools pass.
    """
    n = len(v)
    a, b = _edges(v)
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))  # the closing edge is adjacent to edge 0
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return True
    p1, p2 = a[i], b[i]
    q1, q2 = a[j], b[j]

    def cross(o, d, p):
        return (d[:, 0] - o[:, 0]) * (p[:, 1] - o[:, 1]) - (d[:, 1] - o[:, 1]) * (p[:, 0] - o[:, 0])

    d1 = cross(q1, q2, p1)
    d2 = cross(q1, q2, p2)
    d3 = cross(p1, p2, q1)
    d4 = cross(p1, p2, q2)
    return not np.any((d1 * d2 < 0) & (d3 * d4 < 0))


def extents(poly: PolygonMask):
    """Tight axis-aligned vertex bounds as (min_x, max_x, min_y, max_y)."""
    v = poly.vertices
    return (
        float(v[:, 0].min()),
        float(v[:, 0].max()),
        float(v[:, 1].min()),
        float(v[:, 1].max()),
    )


def polygon_area(poly: PolygonMask) -> float:
    """Absolute shoelace area in square pixels.

    Self-intersecting input still yields the absolute shoelace value but
    triggers a RuntimeWarning, since that value no longer equals the
    enclosed area.
    """
    if not _is_simple(poly.vertices):
        warnings.warn(
            "self-intersecting polygon: area is the absolute shoelace value",
            RuntimeWarning,
            stacklevel=2,
        )
    return abs(_shoelace(poly.vertices))


def _crossings(v: np.ndarray, y: float) -> np.ndarray:
    """X coordinates where the horizontal line at y crosses the contour.

    Half-open rule (y1 <= y < y2 or y2 <= y < y1) so shared vertices are
    counted once; horizontal edges yield no crossing. Suitable for parity
    fills.
    """
    a, b = _edges(v)
    y1, y2 = a[:, 1], b[:, 1]
    hit = ((y1 <= y) & (y < y2)) | ((y2 <= y) & (y < y1))
    if not np.any(hit):
        return np.empty(0)
    x1, x2 = a[hit, 0], b[hit, 0]
    t = (y - y1[hit]) / (y2[hit] - y1[hit])
    return x1 + t * (x2 - x1)


def scanline_diameter(poly: PolygonMask, y: float) -> float:
    """Horizontal extent max(x) - min(x) of the contour at height y; 0.0 when
    the line misses the polygon. Horizontal edges lying exactly on y
    contribute their endpoints."""
    v = poly.vertices
    xs = _crossings(v, y)
    a, b = _edges(v)
    flat = (a[:, 1] == y) & (b[:, 1] == y)
    if np.any(flat):
        xs = np.concatenate([xs, a[flat, 0], b[flat, 0]])
    if xs.size == 0:
        return 0.0
    return float(xs.max() - xs.min())


def rasterize(poly: PolygonMask, width: int, height: int) -> np.ndarray:
    """Binary raster of the polygon on a width x height grid.

    Pixel (i, j) is 1 iff its center (i + 0.5, j + 0.5) is inside under the
    even-odd rule. A polygon reaching outside the grid is clipped with a
    RuntimeWarning.
    """
    if width <= 0 or height <= 0:
        raise ValueError("raster dimensions must be positive")
    grid = np.zeros((height, width), dtype=np.uint8)
    min_x, max_x, min_y, max_y = extents(poly)
    if min_x < 0 or min_y < 0 or max_x > width or max_y > height:
        warnings.warn("polygon exceeds raster bounds; clipping", RuntimeWarning, stacklevel=2)
    r0 = max(0, int(math.ceil(min_y - 0.5)))
    r1 = min(height - 1, int(math.floor(max_y - 0.5)))
    centers = np.arange(width) + 0.5
    v = poly.vertices
    for r in range(r0, r1 + 1):
        xs = _crossings(v, r + 0.5)
        if xs.size == 0:
            continue
        xs.sort()
        inside = (np.searchsorted(xs, centers, side="left") % 2) == 1
        grid[r, inside] = 1
    return grid


def point_to_polygon_distance(p, poly: PolygonMask) -> float:
    """Minimum Euclidean distance from p to the polygon contour.

    Distance is to the boundary, never signed: interior points return their
    positive distance to the nearest edge.
    """
    a, b = _edges(poly.vertices)
    d = b - a
    pt = np.asarray(p, dtype=np.float64)
    t = np.einsum("ij,ij->i", pt - a, d) / np.einsum("ij,ij->i", d, d)
    t = np.clip(t, 0.0, 1.0)
    proj = a + t[:, None] * d
    return float(np.sqrt(np.min(np.sum((proj - pt) ** 2, axis=1))))


def sample_boundary(poly: PolygonMask, n: int) -> np.ndarray:
    """n points equally spaced by arc length along the closed contour,
    starting at vertex 0. Returns an (n, 2) array; deterministic."""
    if n < 3:
        raise ValueError("need at least 3 boundary samples")
    v = poly.vertices
    ring = np.vstack([v, v[:1]])
    seg = np.sqrt(np.sum(np.diff(ring, axis=0) ** 2, axis=1))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.arange(n) * (cum[-1] / n)
    x = np.interp(targets, cum, ring[:, 0])
    y = np.interp(targets, cum, ring[:, 1])
    return np.stack([x, y], axis=1)


def rotate_points(points, center, angle: float) -> np.ndarray:
    """Rotate (n, 2) points about center; positive angle is counter-clockwise
    in math orientation (clockwise on screen)."""
    c, s = math.cos(angle), math.sin(angle)
    p = np.asarray(points, dtype=np.float64) - np.asarray(center, dtype=np.float64)
    out = np.stack([c * p[:, 0] - s * p[:, 1], s * p[:, 0] + c * p[:, 1]], axis=1)
    return out + np.asarray(center, dtype=np.float64)


def rotate_polygon(poly: PolygonMask, center, angle: float) -> PolygonMask:
    """Rigidly rotate the polygon about center (see rotate_points for sign)."""
    return PolygonMask(rotate_points(poly.vertices, center, angle))


def translate_polygon(poly: PolygonMask, dx: float, dy: float) -> PolygonMask:
    return PolygonMask(poly.vertices + np.array([dx, dy]))
