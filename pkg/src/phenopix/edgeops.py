"""Edge-centric raster operators.

sobel/edge_loss score how well a predicted mask's boundary tracks the ground
truth by comparing gradient-magnitude maps. edge_boost sharpens an input
photograph (global contrast stretch, then local acutance) so downstream
segmentation sees crisper fruit boundaries. The attention block is a
reference forward pass of a tiny convolutional gate: two 3x3 convs halve the
channel count, a 1x1 conv plus sigmoid produces a single-channel map in
(0, 1) that multiplies the input feature map.

Grids are numpy arrays: masks (H, W) float, feature maps (C, H, W) float.
All loops run in a fixed order so outputs are bit-reproducible.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .formats import FormatError, ImageBuffer

SOBEL_X = np.array([[-1.0, 0.0, 1.0], [-2.0, 0.0, 2.0], [-1.0, 0.0, 1.0]])
SOBEL_Y = SOBEL_X.T.copy()

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass
class GradientMap:
    gx: np.ndarray
    gy: np.ndarray
    magnitude: np.ndarray


def _correlate3(grid: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 cross-correlation with zero padding.

    Accumulates the nine shifted slices in kernel row-major order, the same
    order a scalar nested loop uses, so results are bit-identical to a naive
    implementation.
    """
    h, w = grid.shape
    pad = np.zeros((h + 2, w + 2), dtype=np.float64)
    pad[1:-1, 1:-1] = grid
    out = np.zeros((h, w), dtype=np.float64)
    for ky in range(3):
        for kx in range(3):
            out = out + kernel[ky, kx] * pad[ky : ky + h, kx : kx + w]
    return out


def sobel(mask) -> GradientMap:
    """Horizontal/vertical Sobel responses and their magnitude, zero-padded
    at the borders."""
    grid = np.asarray(mask, dtype=np.float64)
    if grid.ndim != 2 or grid.shape[0] < 3 or grid.shape[1] < 3:
        raise ValueError("grid must be at least 3x3")
    gx = _correlate3(grid, SOBEL_X)
    gy = _correlate3(grid, SOBEL_Y)
    return GradientMap(gx, gy, np.sqrt(gx * gx + gy * gy))


def edge_loss(pred, gt) -> float:
    """Mean absolute difference between the Sobel magnitudes of two masks.

    Zero iff the gradient maps agree everywhere; symmetric in its arguments.
    """
    p = np.asarray(pred, dtype=np.float64)
    g = np.asarray(gt, dtype=np.float64)
    if p.shape != g.shape:
        raise ValueError(f"mask shapes differ: {p.shape} vs {g.shape}")
    for m in (p, g):
        if m.min() < 0.0 or m.max() > 1.0:
            raise ValueError("mask values must lie in [0, 1]")
    return float(np.mean(np.abs(sobel(p).magnitude - sobel(g).magnitude)))


def _luminance_mean(image: ImageBuffer) -> float:
    data = image.data.astype(np.float64)
    if image.channels == 3:
        wr, wg, wb = LUMA_WEIGHTS
        lum = wr * data[:, :, 0] + wg * data[:, :, 1] + wb * data[:, :, 2]
    else:
        lum = data
    return float(lum.mean())


def contrast_step(image: ImageBuffer, factor: float) -> ImageBuffer:
    """Blend every sample away from the image-wide mean luminance:
    out = clamp(round(m + factor*(v - m))). factor 1 is the identity,
    factor 0 flattens the image to m."""
    if factor < 0:
        raise ValueError("contrast factor must be non-negative")
    data = image.data.astype(np.float64)
    m = _luminance_mean(image)
    out = np.clip(np.rint(m + factor * (data - m)), 0, 255).astype(np.uint8)
    return ImageBuffer(image.width, image.height, image.channels, out)


def _box_blur3(data: np.ndarray) -> np.ndarray:
    """Mean of the 3x3 neighborhood, defined on the interior only; border
    rows/cols of the result are left as zeros and never used."""
    h, w = data.shape[:2]
    acc = np.zeros_like(data, dtype=np.float64)
    if h < 3 or w < 3:
        return acc
    inner = acc[1 : h - 1, 1 : w - 1]
    for dy in range(3):
        for dx in range(3):
            inner += data[dy : dy + h - 2, dx : dx + w - 2]
    inner /= 9.0
    return acc


def acutance_step(image: ImageBuffer, factor: float) -> ImageBuffer:
    """Blend interior samples away from their 3x3 box blur:
    out = clamp(round(b + factor*(v - b))). Border pixels pass through
    unchanged; factor 1 is the identity."""
    if factor < 0:
        raise ValueError("acutance factor must be non-negative")
    out = image.data.copy()
    h, w = image.height, image.width
    if h >= 3 and w >= 3:
        data = image.data.astype(np.float64)
        blur = _box_blur3(data)
        inner = slice(1, h - 1), slice(1, w - 1)
        v = data[inner]
        b = blur[inner]
        out[inner] = np.clip(np.rint(b + factor * (v - b)), 0, 255).astype(np.uint8)
    return ImageBuffer(image.width, image.height, image.channels, out)


def edge_boost(image: ImageBuffer, lambda_c: float = 1.5, lambda_a: float = 1.6) -> ImageBuffer:
    """Contrast stretch then acutance sharpening, both as blends so the unit
    factors reproduce the input bit for bit."""
    return acutance_step(contrast_step(image, lambda_c), lambda_a)


@dataclass
class AttentionWeights:
    """Parameters of the attention gate. Kernels are (out, in, ky, kx);
    each conv's bias follows its kernel."""

    conv1_kernel: np.ndarray  # (C/2, C, 3, 3)
    conv1_bias: np.ndarray  # (C/2,)
    conv2_kernel: np.ndarray  # (C/2, C/2, 3, 3)
    conv2_bias: np.ndarray  # (C/2,)
    conv3_kernel: np.ndarray  # (1, C/2, 1, 1)
    conv3_bias: np.ndarray  # (1,)

    def __post_init__(self):
        half, c = self.conv1_kernel.shape[:2]
        if c != 2 * half or c < 2:
            raise ValueError("first conv must halve an even channel count")
        expected = {
            "conv1_kernel": (half, c, 3, 3),
            "conv1_bias": (half,),
            "conv2_kernel": (half, half, 3, 3),
            "conv2_bias": (half,),
            "conv3_kernel": (1, half, 1, 1),
            "conv3_bias": (1,),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ValueError(f"{name} must have shape {shape}")

    @property
    def channels(self) -> int:
        return self.conv1_kernel.shape[1]


def _conv3x3(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    c_in, h, w = x.shape
    pad = np.zeros((c_in, h + 2, w + 2), dtype=np.float64)
    pad[:, 1:-1, 1:-1] = x
    k = kernel.astype(np.float64)
    out = np.empty((kernel.shape[0], h, w), dtype=np.float64)
    for o in range(kernel.shape[0]):
        acc = np.full((h, w), float(bias[o]), dtype=np.float64)
        for ci in range(c_in):
            for ky in range(3):
                for kx in range(3):
                    acc = acc + k[o, ci, ky, kx] * pad[ci, ky : ky + h, kx : kx + w]
        out[o] = acc
    return out


def _conv1x1(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray) -> np.ndarray:
    k = kernel.astype(np.float64)[:, :, 0, 0]
    out = np.tensordot(k, x, axes=(1, 0))
    return out + np.asarray(bias, dtype=np.float64)[:, None, None]


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def attention_map(p5, weights: AttentionWeights) -> np.ndarray:
    """The (1, H, W) sigmoid gate for a (C, H, W) feature map."""
    x = np.asarray(p5, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError("feature map must be (channels, height, width)")
    if x.shape[0] != weights.channels:
        raise ValueError(
            f"feature map has {x.shape[0]} channels, weights expect {weights.channels}"
        )
    f1 = np.maximum(_conv3x3(x, weights.conv1_kernel, weights.conv1_bias), 0.0)
    f2 = np.maximum(_conv3x3(f1, weights.conv2_kernel, weights.conv2_bias), 0.0)
    return _sigmoid(_conv1x1(f2, weights.conv3_kernel, weights.conv3_bias))


def edge_attention_forward(p5, weights: AttentionWeights) -> np.ndarray:
    """Gate a (C, H, W) feature map by its attention map: every channel is
    scaled pointwise by a value in (0, 1), so magnitudes never grow."""
    x = np.asarray(p5, dtype=np.float64)
    return x * attention_map(x, weights)


def save_attention_weights(weights: AttentionWeights, path):
    """Binary weight file: uint32 little-endian channel count, then float32
    little-endian arrays in declaration order (kernel then bias per conv),
    kernels flattened (out, in, ky, kx) row-major."""
    with open(path, "wb") as fh:
        fh.write(struct.pack("<I", weights.channels))
        for name in ("conv1_kernel", "conv1_bias", "conv2_kernel", "conv2_bias", "conv3_kernel", "conv3_bias"):
            fh.write(np.ascontiguousarray(getattr(weights, name), dtype="<f4").tobytes())


def load_attention_weights(path) -> AttentionWeights:
    buf = open(path, "rb").read()
    if len(buf) < 4:
        raise FormatError(f"{path}: missing channel-count header")
    c = struct.unpack("<I", buf[:4])[0]
    if c < 2 or c % 2:
        raise FormatError(f"{path}: channel count {c} must be even and >= 2")
    half = c // 2
    shapes = [(half, c, 3, 3), (half,), (half, half, 3, 3), (half,), (1, half, 1, 1), (1,)]
    need = 4 + 4 * sum(int(np.prod(s)) for s in shapes)
    if len(buf) != need:
        raise FormatError(f"{path}: expected {need} bytes for {c} channels, got {len(buf)}")
    arrays, pos = [], 4
    for shape in shapes:
        count = int(np.prod(shape))
        arrays.append(np.frombuffer(buf, dtype="<f4", count=count, offset=pos).reshape(shape).copy())
        pos += 4 * count
    return AttentionWeights(*arrays)
