"""Evaluation suite: relative error, box-plot statistics, mean edge error,
mask IoU, and single-class detection metrics (precision, recall, mAP50).

Everything here is deterministic: sorting tie-breaks are fixed, reductions
run in input order, and boundary sampling is arc-length uniform rather than
random.
"""

import math
from dataclasses import dataclass

import numpy as np

from .geometry import PolygonMask, extents, point_to_polygon_distance, rasterize, sample_boundary

TRAITS = ("width", "height", "area", "volume")


def relative_error(p_t: float, p_p: float) -> float:
    """Signed percent deviation of the predicted value from the true one."""
    if p_t <= 0:
        raise ValueError("true value must be positive")
    return (p_p - p_t) / p_t * 100.0


@dataclass
class BoxStats:
    median: float
    q1: float
    q3: float
    min: float
    max: float
    n: int


def _middle(values) -> float:
    m = len(values) // 2
    if len(values) % 2:
        return float(values[m])
    return (float(values[m - 1]) + float(values[m])) / 2.0


def box_stats(values) -> BoxStats:
    """Median and Tukey hinges (median excluded from the halves for odd n),
    plus the full range. Matches the usual box-plot construction."""
    data = sorted(float(v) for v in values)
    if not data:
        raise ValueError("need at least one value")
    n = len(data)
    median = _middle(data)
    if n == 1:
        q1 = q3 = median
    else:
        q1 = _middle(data[: n // 2])
        q3 = _middle(data[(n + 1) // 2 :])
    return BoxStats(median, q1, q3, data[0], data[-1], n)


@dataclass
class EdgeErrorReport:
    per_pair: list  # normalized percent, one value per (pred, gt) pair
    mee: float  # mean of per_pair
    pair_count: int
    samples_per_mask: int


def mean_edge_error(pairs, n_samples: int = 100) -> EdgeErrorReport:
    """Mean edge error over (pred, gt) polygon pairs.

    Per pair: sample n_samples points along the predicted contour at uniform
    arc length, take each point's minimum distance to the ground-truth
    contour, normalize by the gt bounding-box diagonal, average, and scale to
    percent. The report's mee field averages the per-pair values.
    """
    pairs = list(pairs)
    if not pairs:
        raise ValueError("need at least one (pred, gt) pair")
    if n_samples < 3:
        raise ValueError("need at least 3 boundary samples")
    per_pair = []
    for pred, gt in pairs:
        if np.array_equal(pred.vertices, gt.vertices):
            # coincident contours: exactly zero, skip the sampling noise
            per_pair.append(0.0)
            continue
        min_x, max_x, min_y, max_y = extents(gt)
        diagonal = math.hypot(max_x - min_x, max_y - min_y)
        points = sample_boundary(pred, n_samples)
        total = 0.0
        for p in points:
            total += point_to_polygon_distance(p, gt)
        per_pair.append(total / n_samples / diagonal * 100.0)
    return EdgeErrorReport(per_pair, sum(per_pair) / len(per_pair), len(per_pair), n_samples)


def mask_iou(a: PolygonMask, b: PolygonMask, grid) -> float:
    """Intersection over union of the two polygons rasterized on a (w, h)
    grid. Both empty rasters count as IoU 0."""
    w, h = grid
    ra = rasterize(a, w, h).astype(bool)
    rb = rasterize(b, w, h).astype(bool)
    union = int(np.count_nonzero(ra | rb))
    if union == 0:
        return 0.0
    return int(np.count_nonzero(ra & rb)) / union


@dataclass
class DetectionEval:
    precision: float
    recall: float
    map50: float
    iou_threshold: float
    confidence_threshold: float
    n_predictions: int
    n_gt: int
    curve: list  # (recall, precision) after each prediction, confidence-descending


def _auto_grid(polys) -> tuple:
    max_x = max(extents(p)[1] for p in polys)
    max_y = max(extents(p)[3] for p in polys)
    return (int(math.ceil(max_x)) + 1, int(math.ceil(max_y)) + 1)


def detection_eval(scenes, iou_threshold: float = 0.5, confidence_threshold: float = 0.5, grid=None) -> DetectionEval:
    """Single-class detection scoring over scenes of ([(pred_polygon,
    confidence), ...], [gt_polygon, ...]) pairs.

    Predictions are matched greedily per scene in descending confidence; each
    ground truth matches at most once, and a match needs mask IoU >= the
    threshold. Precision and recall are reported at the confidence cutoff;
    AP50 integrates the precision envelope over recall with the all-point
    interpolation, pooling predictions across scenes. IoU rasters use the
    given (w, h) grid, or per scene the tight joint bounds when grid is None.
    Ties in confidence break by scene order, then input order: deterministic.
    """
    records = []  # (confidence, scene_idx, pred_idx, is_tp)
    n_gt = 0
    for scene_idx, (preds, gts) in enumerate(scenes):
        n_gt += len(gts)
        if not preds:
            continue
        scene_grid = grid
        if scene_grid is None:
            scene_grid = _auto_grid([p for p, _ in preds] + list(gts))
        order = sorted(range(len(preds)), key=lambda i: (-preds[i][1], i))
        gt_rasters = [rasterize(g, *scene_grid).astype(bool) for g in gts]
        gt_taken = [False] * len(gts)
        for i in order:
            poly, conf = preds[i]
            pr = rasterize(poly, *scene_grid).astype(bool)
            best_iou, best_j = 0.0, -1
            for j, gr in enumerate(gt_rasters):
                if gt_taken[j]:
                    continue
                union = int(np.count_nonzero(pr | gr))
                iou = int(np.count_nonzero(pr & gr)) / union if union else 0.0
                if iou > best_iou:
                    best_iou, best_j = iou, j
            is_tp = best_iou >= iou_threshold and best_j >= 0
            if is_tp:
                gt_taken[best_j] = True
            records.append((conf, scene_idx, i, is_tp))

    records.sort(key=lambda r: (-r[0], r[1], r[2]))
    flags = [r[3] for r in records]
    n_pred = len(records)

    curve = []
    tp_cum = 0
    for i, tp in enumerate(flags, start=1):
        tp_cum += tp
        rec = tp_cum / n_gt if n_gt else 0.0
        curve.append((rec, tp_cum / i))

    kept = [(r[0], r[3]) for r in records if r[0] >= confidence_threshold]
    tp_kept = sum(tp for _, tp in kept)
    precision = tp_kept / len(kept) if kept else 0.0
    recall = tp_kept / n_gt if n_gt else 0.0

    if n_gt == 0 or n_pred == 0:
        ap = 0.0
    else:
        mrec = [0.0] + [r for r, _ in curve] + [1.0]
        mpre = [0.0] + [p for _, p in curve] + [0.0]
        for i in range(len(mpre) - 2, -1, -1):
            mpre[i] = max(mpre[i], mpre[i + 1])
        ap = sum((mrec[i + 1] - mrec[i]) * mpre[i + 1] for i in range(len(mrec) - 1))

    return DetectionEval(
        precision=precision,
        recall=recall,
        map50=ap,
        iou_threshold=iou_threshold,
        confidence_threshold=confidence_threshold,
        n_predictions=n_pred,
        n_gt=n_gt,
        curve=curve,
    )
