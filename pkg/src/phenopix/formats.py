"""Readers and writers for every on-disk artifact the toolkit touches.

Images travel as Netpbm PGM/PPM, both ASCII (P2/P3) and binary (P5/P6),
maxval 255. Depth maps are binary PGM with maxval 65535, 16-bit big-endian
samples holding millimeters; in memory they are centimeters. Scene manifests
and standalone polygon sets are JSON. Calibration samples and the bundled
phenotype ground-truth table are CSV.

All readers raise FormatError with the offending location in the message;
writers emit canonical output (binary Netpbm, one-whitespace headers) so a
read/write round trip is byte-identical for binary inputs.
"""

import csv
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .geometry import PolygonMask

_WHITESPACE = (9, 10, 11, 12, 13, 32)


class FormatError(ValueError):
    """Malformed or unsupported input file."""


@dataclass
class ImageBuffer:
    """Decoded raster image. data is uint8, shape (h, w) for grayscale or
    (h, w, 3) for color."""

    width: int
    height: int
    channels: int
    data: np.ndarray

    def __post_init__(self):
        expected = (self.height, self.width) if self.channels == 1 else (self.height, self.width, 3)
        if self.channels not in (1, 3) or self.data.shape != expected or self.data.dtype != np.uint8:
            raise ValueError("image data shape/dtype does not match its declared geometry")


@dataclass
class DepthMap:
    """Per-pixel depth in centimeters; 0.0 marks a missing reading."""

    width: int
    height: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.height, self.width):
            raise ValueError("depth data shape does not match its declared geometry")
        if np.any(self.values < 0):
            raise ValueError("depth values cannot be negative")


@dataclass
class CalibrationSample:
    """One measured (depth, scale) pair from the calibration rig."""

    depth_cm: float
    pixels_per_cm: float

    def __post_init__(self):
        if self.depth_cm <= 0 or self.pixels_per_cm <= 0:
            raise ValueError("calibration samples must be positive")


@dataclass
class FruitEntry:
    """One detected fruit in a scene manifest."""

    fruit_id: int
    box: tuple  # (x, y, w, h) in pixels
    confidence: float
    body: tuple  # keypoint (x, y)
    carpopodium: tuple | None  # keypoint (x, y), None when not detected
    pred_polygon: PolygonMask
    gt_polygon: PolygonMask | None


@dataclass
class SceneManifest:
    image: str
    depth: str
    fruits: list

    def check_bounds(self, width: int, height: int):
        """Reject boxes that leave the image; callable only once the image
        dimensions are known."""
        for f in self.fruits:
            x, y, w, h = f.box
            if x + w > width or y + h > height:
                raise FormatError(f"fruit {f.fruit_id}: box exceeds {width}x{height} image")


@dataclass
class PolygonEntry:
    """One polygon in a standalone polygon file (evaluation input)."""

    fruit_id: int
    polygon: PolygonMask
    confidence: float


@dataclass
class PolygonFile:
    grid: tuple | None  # (w, h) raster size, optional
    entries: list


@dataclass
class GroundTruthRow:
    """One fruit from the bundled field study: manual vs estimated traits and
    the recorded percent errors."""

    plant: int
    fruit: int
    width_true: float
    width_pred: float
    width_err: float
    height_true: float
    height_pred: float
    height_err: float
    area_true: float
    area_pred: float
    area_err: float
    volume_true: float
    volume_pred: float
    volume_err: float


def _next_token(buf: bytes, pos: int):
    n = len(buf)
    while pos < n:
        c = buf[pos]
        if c in _WHITESPACE:
            pos += 1
        elif c == 0x23:  # '#' comment runs to end of line
            while pos < n and buf[pos] not in (10, 13):
                pos += 1
        else:
            break
    start = pos
    while pos < n and buf[pos] not in _WHITESPACE:
        pos += 1
    if start == pos:
        raise FormatError("unexpected end of Netpbm header")
    return buf[start:pos], pos


def _int_token(buf: bytes, pos: int, what: str):
    tok, pos = _next_token(buf, pos)
    try:
        value = int(tok)
    except ValueError:
        raise FormatError(f"bad {what} {tok!r} in Netpbm header") from None
    return value, pos


def _read_header(buf: bytes, path):
    magic, pos = _next_token(buf, 0)
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise FormatError(f"{path}: not a P2/P3/P5/P6 Netpbm file")
    width, pos = _int_token(buf, pos, "width")
    height, pos = _int_token(buf, pos, "height")
    maxval, pos = _int_token(buf, pos, "maxval")
    if width <= 0 or height <= 0:
        raise FormatError(f"{path}: image dimensions must be positive")
    return magic.decode(), width, height, maxval, pos


def read_image(path) -> ImageBuffer:
    """Load a PGM/PPM image (maxval 255). P2/P5 give one channel, P3/P6 three."""
    buf = open(path, "rb").read()
    magic, width, height, maxval, pos = _read_header(buf, path)
    if maxval != 255:
        raise FormatError(f"{path}: expected maxval 255, got {maxval}")
    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels
    if magic in ("P5", "P6"):
        pos += 1  # single whitespace byte terminates the header
        raw = buf[pos : pos + count]
        if len(raw) < count:
            raise FormatError(f"{path}: truncated pixel data ({len(raw)} of {count} bytes)")
        flat = np.frombuffer(raw, dtype=np.uint8, count=count)
    else:
        tokens = buf[pos:].split()
        if len(tokens) < count:
            raise FormatError(f"{path}: truncated pixel data ({len(tokens)} of {count} samples)")
        try:
            values = [int(t) for t in tokens[:count]]
        except ValueError:
            raise FormatError(f"{path}: non-numeric pixel sample") from None
        if min(values) < 0 or max(values) > maxval:
            raise FormatError(f"{path}: pixel sample outside 0..{maxval}")
        flat = np.array(values, dtype=np.uint8)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return ImageBuffer(width, height, channels, flat.reshape(shape).copy())


def write_image(image: ImageBuffer, path):
    """Write binary PGM (P5) or PPM (P6) with the canonical one-line-per-field
    header, so rereading reproduces the bytes exactly."""
    magic = "P6" if image.channels == 3 else "P5"
    header = f"{magic}\n{image.width} {image.height}\n255\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.data.tobytes())


def read_depth(path) -> DepthMap:
    """Load a 16-bit binary PGM depth map. Stored samples are millimeters,
    big-endian, maxval 65535; returned values are centimeters."""
    buf = open(path, "rb").read()
    magic, width, height, maxval, pos = _read_header(buf, path)
    if magic != "P5":
        raise FormatError(f"{path}: depth maps must be binary grayscale (P5)")
    if maxval != 65535:
        raise FormatError(f"{path}: depth maps need maxval 65535, got {maxval}")
    pos += 1
    count = width * height
    raw = buf[pos : pos + 2 * count]
    if len(raw) < 2 * count:
        raise FormatError(f"{path}: truncated depth data ({len(raw)} of {2 * count} bytes)")
    mm = np.frombuffer(raw, dtype=">u2", count=count).reshape(height, width)
    return DepthMap(width, height, mm.astype(np.float64) / 10.0)


def write_depth(depth: DepthMap, path):
    mm = np.rint(depth.values * 10.0)
    if np.any(mm > 65535):
        raise ValueError("depth exceeds the 16-bit millimeter range")
    header = f"P5\n{depth.width} {depth.height}\n65535\n".encode()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(mm.astype(">u2").tobytes())


def _point(obj, ctx: str):
    if not isinstance(obj, (list, tuple)) or len(obj) != 2:
        raise FormatError(f"{ctx}: expected an [x, y] pair")
    try:
        return float(obj[0]), float(obj[1])
    except (TypeError, ValueError):
        raise FormatError(f"{ctx}: non-numeric coordinate") from None


def _polygon(obj, ctx: str) -> PolygonMask:
    if not isinstance(obj, list) or len(obj) < 3:
        raise FormatError(f"{ctx}: polygon needs at least 3 [x, y] vertices")
    pts = [_point(p, ctx) for p in obj]
    try:
        return PolygonMask(np.array(pts, dtype=np.float64))
    except ValueError as exc:
        raise FormatError(f"{ctx}: {exc}") from None


def read_manifest(path) -> SceneManifest:
    """Parse a scene manifest (JSON): image/depth paths plus per-fruit boxes,
    keypoints and polygons. Box coordinates must be non-negative with positive
    size; the upper bound is checked later against the loaded image."""
    try:
        doc = json.load(open(path, "rb"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise FormatError(f"{path}: manifest must be a JSON object")
    for key in ("image", "depth", "fruits"):
        if key not in doc:
            raise FormatError(f"{path}: missing required key {key!r}")
    if not isinstance(doc["image"], str) or not isinstance(doc["depth"], str):
        raise FormatError(f"{path}: image and depth must be path strings")
    if not isinstance(doc["fruits"], list):
        raise FormatError(f"{path}: fruits must be a list")

    fruits = []
    seen = set()
    for raw in doc["fruits"]:
        if not isinstance(raw, dict) or "id" not in raw:
            raise FormatError(f"{path}: every fruit needs an integer id")
        fid = raw["id"]
        if not isinstance(fid, int) or isinstance(fid, bool):
            raise FormatError(f"{path}: fruit id {fid!r} is not an integer")
        ctx = f"{path}: fruit {fid}"
        if fid in seen:
            raise FormatError(f"{ctx}: duplicate id")
        seen.add(fid)

        box = raw.get("box")
        if not isinstance(box, (list, tuple)) or len(box) != 4:
            raise FormatError(f"{ctx}: box must be [x, y, w, h]")
        try:
            x, y, w, h = (int(b) for b in box)
        except (TypeError, ValueError):
            raise FormatError(f"{ctx}: box values must be integers") from None
        if x < 0 or y < 0:
            raise FormatError(f"{ctx}: box origin must be non-negative")
        if w <= 0 or h <= 0:
            raise FormatError(f"{ctx}: box size must be positive")

        try:
            conf = float(raw.get("confidence"))
        except (TypeError, ValueError):
            raise FormatError(f"{ctx}: confidence must be a number") from None
        if not 0.0 <= conf <= 1.0:
            raise FormatError(f"{ctx}: confidence {conf} outside [0, 1]")

        body = _point(raw.get("body"), f"{ctx}: body")
        carp = raw.get("carpopodium")
        carp = None if carp is None else _point(carp, f"{ctx}: carpopodium")

        pred = _polygon(raw.get("pred_polygon"), f"{ctx}: pred_polygon")
        gt = raw.get("gt_polygon")
        gt = None if gt is None else _polygon(gt, f"{ctx}: gt_polygon")
        fruits.append(FruitEntry(fid, (x, y, w, h), conf, body, carp, pred, gt))
    return SceneManifest(doc["image"], doc["depth"], fruits)


def read_polygon_file(path) -> PolygonFile:
    """Parse a standalone polygon set (JSON): {"grid": [w, h]?, "fruits":
    [{"id", "polygon", "confidence"?}, ...]}. Used as evaluation input."""
    try:
        doc = json.load(open(path, "rb"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict) or "fruits" not in doc or not isinstance(doc["fruits"], list):
        raise FormatError(f"{path}: expected an object with a fruits list")
    grid = doc.get("grid")
    if grid is not None:
        if not isinstance(grid, (list, tuple)) or len(grid) != 2:
            raise FormatError(f"{path}: grid must be [width, height]")
        grid = (int(grid[0]), int(grid[1]))
        if grid[0] <= 0 or grid[1] <= 0:
            raise FormatError(f"{path}: grid dimensions must be positive")
    entries = []
    seen = set()
    for raw in doc["fruits"]:
        if not isinstance(raw, dict) or "id" not in raw:
            raise FormatError(f"{path}: every entry needs an integer id")
        fid = raw["id"]
        if not isinstance(fid, int) or isinstance(fid, bool):
            raise FormatError(f"{path}: entry id {fid!r} is not an integer")
        if fid in seen:
            raise FormatError(f"{path}: duplicate id {fid}")
        seen.add(fid)
        poly = _polygon(raw.get("polygon"), f"{path}: entry {fid}")
        conf = raw.get("confidence", 1.0)
        try:
            conf = float(conf)
        except (TypeError, ValueError):
            raise FormatError(f"{path}: entry {fid}: confidence must be a number") from None
        if not 0.0 <= conf <= 1.0:
            raise FormatError(f"{path}: entry {fid}: confidence {conf} outside [0, 1]")
        entries.append(PolygonEntry(fid, poly, conf))
    return PolygonFile(grid, entries)


def read_calibration_csv(path) -> list:
    """Parse calibration samples from CSV with header depth_cm,pixels_per_cm."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != ["depth_cm", "pixels_per_cm"]:
        raise FormatError(f"{path}: expected header 'depth_cm,pixels_per_cm'")
    samples = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise FormatError(f"{path}: line {lineno}: expected 2 fields, got {len(row)}")
        try:
            d, p = float(row[0]), float(row[1])
        except ValueError:
            raise FormatError(f"{path}: line {lineno}: non-numeric value") from None
        if d <= 0 or p <= 0:
            raise FormatError(f"{path}: line {lineno}: values must be positive")
        samples.append(CalibrationSample(d, p))
    return samples


_GT_HEADER = [
    "plant", "fruit",
    "W_t", "W_p", "W_e",
    "H_t", "H_p", "H_e",
    "A_t", "A_p", "A_e",
    "V_t", "V_p", "V_e",
]


def parse_phenotype_csv(text: str, origin: str) -> list:
    rows = list(csv.reader(text.splitlines()))
    if not rows or [c.strip() for c in rows[0]] != _GT_HEADER:
        raise FormatError(f"{origin}: expected header '{','.join(_GT_HEADER)}'")
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 14:
            raise FormatError(f"{origin}: line {lineno}: expected 14 fields, got {len(row)}")
        try:
            plant, fruit = int(row[0]), int(row[1])
            vals = [float(c) for c in row[2:]]
        except ValueError:
            raise FormatError(f"{origin}: line {lineno}: non-numeric value") from None
        if min(vals[0], vals[1], vals[3], vals[4], vals[6], vals[7], vals[9], vals[10]) <= 0:
            raise FormatError(f"{origin}: line {lineno}: trait values must be positive")
        out.append(GroundTruthRow(plant, fruit, *vals))
    if not out:
        raise FormatError(f"{origin}: no data rows")
    return out


def read_phenotype_csv(path) -> list:
    """Parse a phenotype study table: per fruit, manual and estimated values
    of the four traits plus their recorded percent errors."""
    return parse_phenotype_csv(open(path).read(), str(path))


def load_bundled_phenotype_table() -> list:
    """The packaged 31-fruit greenhouse study shipped with the library."""
    text = resources.files("phenopix").joinpath("data/phenotype_gt.csv").read_text()
    return parse_phenotype_csv(text, "bundled phenotype table")
