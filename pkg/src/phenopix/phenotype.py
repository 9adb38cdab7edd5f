"""Pixel-space trait extraction from a pose-corrected fruit polygon.

Width and height come from the polygon extents, area from the shoelace
formula, and volume from a solid-of-revolution model: each pixel row of the
silhouette is treated as a disk whose diameter is the horizontal extent of
the contour at that row. Traits are in pixel units here; metric conversion
lives in the fusion module.
"""

import math
from dataclasses import dataclass

from .formats import ImageBuffer
from .geometry import PolygonMask, extents, polygon_area, scanline_diameter


@dataclass
class PixelPhenotype:
    width_px: float
    height_px: float
    area_px2: float
    volume_px3: float


def crop_individual(image: ImageBuffer, box) -> ImageBuffer:
    """Copy the (x, y, w, h) sub-image. Callers translate polygon and
    keypoint coordinates by (-x, -y) themselves."""
    x, y, w, h = (int(v) for v in box)
    if w <= 0 or h <= 0:
        raise ValueError("box size must be positive")
    if x < 0 or y < 0 or x + w > image.width or y + h > image.height:
        raise ValueError(
            f"box ({x},{y},{w},{h}) exceeds {image.width}x{image.height} image"
        )
    return ImageBuffer(w, h, image.channels, image.data[y : y + h, x : x + w].copy())


def measure(poly: PolygonMask) -> PixelPhenotype:
    """Width, height, silhouette area and solid-of-revolution volume.

    Volume is a midpoint-rule sum: rows r from ceil(min_y) up to but not
    including floor(max_y), each contributing pi * (D(r + 0.5) / 2)^2 * 1
    where D is the scanline diameter. Expects an uprighted polygon; tilt
    inflates width and height.
    """
    min_x, max_x, min_y, max_y = extents(poly)
    width = max_x - min_x
    height = max_y - min_y
    if width <= 0.0 or height <= 0.0:
        raise ValueError("degenerate polygon: zero width or height")
    area = polygon_area(poly)
    volume = 0.0
    for r in range(math.ceil(min_y), math.floor(max_y)):
        d = scanline_diameter(poly, r + 0.5)
        volume += math.pi * (d / 2.0) ** 2
    return PixelPhenotype(width, height, area, volume)
