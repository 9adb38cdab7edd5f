"""Depth-to-scale calibration and pixel-to-metric fusion.

The camera rig obeys an inverse-proportional law: the number of pixels
covering one centimeter shrinks with distance, pixels_per_cm = k / depth_cm.
k is fitted once from ruler shots at known depths; at inference each fruit's
depth reading turns pixel traits into metric ones by dividing by scale^j,
with j = 1 for lengths, 2 for area, 3 for volume.
"""

import math
from dataclasses import dataclass

import numpy as np

from .formats import DepthMap
from .geometry import PolygonMask, rasterize
from .phenotype import PixelPhenotype


class MissingDepthError(ValueError):
    """The depth map holds no usable reading for the requested region."""


@dataclass
class CalibrationModel:
    k: float  # pixels_per_cm * depth_cm, constant of the inverse law
    n_samples: int
    rms_residual: float  # pixels/cm, over the fitted samples

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("calibration coefficient must be positive")
        if self.rms_residual < 0:
            raise ValueError("rms residual cannot be negative")

    def scale_at(self, depth_cm: float) -> float:
        if depth_cm <= 0:
            raise ValueError("depth must be positive")
        return self.k / depth_cm


@dataclass
class MetricPhenotype:
    width_cm: float
    height_cm: float
    area_cm2: float
    volume_cm3: float
    depth_used_cm: float
    scale_px_per_cm: float


def fit_calibration(samples) -> CalibrationModel:
    """Least-squares fit of pixels_per_cm = k / depth_cm.

    Pixel counts are the measured (noisy) quantity, so the objective is
    sum_i (p_i - k/d_i)^2, minimized in closed form by
    k = sum(p_i/d_i) / sum(1/d_i^2).
    """
    if not samples:
        raise ValueError("at least one calibration sample required")
    d = np.array([s.depth_cm for s in samples], dtype=np.float64)
    p = np.array([s.pixels_per_cm for s in samples], dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("calibration depths must be positive")
    k = float(np.sum(p / d) / np.sum(1.0 / d**2))
    rms = float(math.sqrt(np.mean((p - k / d) ** 2)))
    return CalibrationModel(k, len(samples), rms)


def depth_at(depth: DepthMap, box, mode: str = "center", polygon: PolygonMask | None = None) -> float:
    """Depth reading in cm for a fruit region.

    mode="center" reads the single pixel at the box center. mode="mask-median"
    takes the median of all strictly positive readings under the fruit
    polygon, which rides out sensor dropouts; it needs the polygon.
    """
    x, y, w, h = (int(v) for v in box)
    if w <= 0 or h <= 0:
        raise ValueError("box size must be positive")
    if x < 0 or y < 0 or x + w > depth.width or y + h > depth.height:
        raise ValueError(f"box exceeds {depth.width}x{depth.height} depth map")
    if mode == "center":
        value = float(depth.values[y + h // 2, x + w // 2])
        if value <= 0.0:
            raise MissingDepthError("no depth reading at box center")
        return value
    if mode == "mask-median":
        if polygon is None:
            raise ValueError("mask-median mode requires the fruit polygon")
        mask = rasterize(polygon, depth.width, depth.height).astype(bool)
        readings = depth.values[mask]
        readings = readings[readings > 0]
        if readings.size == 0:
            raise MissingDepthError("no positive depth readings under the mask")
        return float(np.median(readings))
    raise ValueError(f"unknown depth mode {mode!r}")


def fuse(px: PixelPhenotype, model: CalibrationModel, d: float) -> MetricPhenotype:
    """Convert pixel traits to metric using scale = k/d: lengths divide by
    scale, area by scale^2, volume by scale^3."""
    if d <= 0:
        raise ValueError("depth must be positive")
    s = model.scale_at(d)
    return MetricPhenotype(
        width_cm=px.width_px / s,
        height_cm=px.height_px / s,
        area_cm2=px.area_px2 / s**2,
        volume_cm3=px.volume_px3 / s**3,
        depth_used_cm=d,
        scale_px_per_cm=s,
    )
