"""Fruit pose from keypoints, and the rotation that uprights a tilted fruit.

The pose vector runs from the body-center keypoint to the carpopodium
(stem attachment) keypoint. An upright fruit has its carpopodium straight
above the body center, i.e. pose parallel to (0, -1) in image coordinates.
Measuring width and height on the axis-aligned polygon of a tilted fruit
overstates both, so the polygon and its image are rotated until the pose
points straight up before any measuring happens.
"""

import math
from dataclasses import dataclass

import numpy as np

from .formats import ImageBuffer
from .geometry import PolygonMask, rotate_polygon

UP = (0.0, -1.0)  # screen-up in image coordinates


class PoseUnavailableError(ValueError):
    """Carpopodium keypoint missing, so no pose can be computed."""


class DegeneratePoseError(ValueError):
    """Keypoints coincide; the pose direction is undefined."""


@dataclass
class KeypointPair:
    body: tuple  # (x, y)
    carpopodium: tuple | None  # (x, y), None when the detector missed it


@dataclass
class PoseResult:
    pose: tuple  # carpopodium minus body, (dx, dy)
    theta: float  # unsigned tilt from screen-up, [0, pi]
    theta_signed: float  # (-pi, pi], positive when tilted clockwise on screen
    corrected: bool = False


def compute_pose(keypoints: KeypointPair) -> PoseResult:
    """Tilt of the body-to-carpopodium vector against screen-up.

    theta is the unsigned angle from acos; theta_signed keeps the side, so
    rotating by -theta_signed uprights the fruit.
    """
    if keypoints.carpopodium is None:
        raise PoseUnavailableError("carpopodium keypoint missing")
    dx = keypoints.carpopodium[0] - keypoints.body[0]
    dy = keypoints.carpopodium[1] - keypoints.body[1]
    norm = math.hypot(dx, dy)
    if norm == 0.0:
        raise DegeneratePoseError("body and carpopodium keypoints coincide")
    cos_theta = max(-1.0, min(1.0, -dy / norm))
    return PoseResult(
        pose=(dx, dy),
        theta=math.acos(cos_theta),
        theta_signed=math.atan2(dx, -dy),
    )


def rotate_image(image: ImageBuffer, angle: float) -> ImageBuffer:
    """Rotate the image by angle about its center (w/2, h/2), same output
    size, bilinear resampling, black fill outside the source.

    angle == 0.0 short-circuits to an exact pixel copy, which keeps the
    no-tilt path bit-identical.
    """
    if angle == 0.0:
        return ImageBuffer(image.width, image.height, image.channels, image.data.copy())
    h, w = image.height, image.width
    cx, cy = w / 2.0, h / 2.0
    jj, ii = np.meshgrid(np.arange(h), np.arange(w), indexing="ij")
    qx = ii + 0.5 - cx
    qy = jj + 0.5 - cy
    # inverse mapping: destination center pulled back through R(-angle)
    c, s = math.cos(-angle), math.sin(-angle)
    sx = c * qx - s * qy + cx
    sy = s * qx + c * qy + cy
    ax = sx - 0.5
    ay = sy - 0.5
    x0 = np.floor(ax).astype(np.int64)
    y0 = np.floor(ay).astype(np.int64)
    fx = ax - x0
    fy = ay - y0

    data = image.data if image.channels == 3 else image.data[:, :, None]
    acc = np.zeros((h, w, data.shape[2]), dtype=np.float64)
    for dy, dx, wgt in (
        (0, 0, (1 - fy) * (1 - fx)),
        (0, 1, (1 - fy) * fx),
        (1, 0, fy * (1 - fx)),
        (1, 1, fy * fx),
    ):
        ys = y0 + dy
        xs = x0 + dx
        valid = (ys >= 0) & (ys < h) & (xs >= 0) & (xs < w)
        sample = np.zeros((h, w, data.shape[2]), dtype=np.float64)
        sample[valid] = data[ys[valid], xs[valid]]
        acc += wgt[:, :, None] * sample
    out = np.clip(np.rint(acc), 0, 255).astype(np.uint8)
    if image.channels == 1:
        out = out[:, :, 0]
    return ImageBuffer(w, h, image.channels, out)


def rotate_keypoints(keypoints: KeypointPair, center, angle: float) -> KeypointPair:
    pts = [keypoints.body]
    if keypoints.carpopodium is not None:
        pts.append(keypoints.carpopodium)
    from .geometry import rotate_points

    rot = rotate_points(np.array(pts), center, angle)
    body = (float(rot[0, 0]), float(rot[0, 1]))
    carp = (float(rot[1, 0]), float(rot[1, 1])) if keypoints.carpopodium is not None else None
    return KeypointPair(body, carp)


def correct_pose(image: ImageBuffer, polygon: PolygonMask, keypoints: KeypointPair):
    """Upright the fruit: rotate image and polygon by -theta_signed about the
    image center so the pose vector ends up parallel to (0, -1).

    Returns (rotated image, rotated polygon). The polygon transform is exact;
    the image is resampled. Already-upright input returns the image bytes
    unchanged.
    """
    pose = compute_pose(keypoints)
    angle = -pose.theta_signed
    center = (image.width / 2.0, image.height / 2.0)
    return rotate_image(image, angle), rotate_polygon(polygon, center, angle)
