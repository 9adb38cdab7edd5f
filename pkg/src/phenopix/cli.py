"""Command-line front end.

Subcommands:
  phenotype  measure every fruit in a scene manifest and emit a JSON report
  calibrate  fit the depth-to-scale coefficient from a calibration CSV
  stats      per-trait relative-error box statistics from a study table
  eval       segmentation evaluators: mee | map | edgeloss
  boost      contrast + acutance enhancement of a PPM/PGM image

Reports are UTF-8 JSON/CSV and byte-stable across reruns; timing goes to
stderr only. Optional --fig arguments render a matplotlib figure next to the
delimited output. Exit codes: 0 on success (including per-fruit soft
failures), 2 on fatal errors.
"""

import argparse
import json
import math
import sys
import time

from . import report as reportmod
from .edgeops import edge_boost, edge_loss
from .formats import (
    FormatError,
    load_bundled_phenotype_table,
    read_calibration_csv,
    read_depth,
    read_image,
    read_manifest,
    read_phenotype_csv,
    read_polygon_file,
    write_image,
)
from .fusion import MissingDepthError, CalibrationModel, depth_at, fit_calibration, fuse
from .geometry import extents, rasterize, translate_polygon
from .metrics import TRAITS, box_stats, detection_eval, mean_edge_error
from .phenotype import crop_individual, measure
from .pose import (
    DegeneratePoseError,
    KeypointPair,
    PoseUnavailableError,
    compute_pose,
    correct_pose,
)

SCHEMA_VERSION = 1


def load_calibration(path) -> CalibrationModel:
    """Accept either a saved model file (first line `k=<value>`) or a raw
    calibration CSV, which is fitted on the fly."""
    with open(path) as fh:
        head = fh.read(2)
    if head == "k=":
        line = open(path).readline().strip()
        try:
            k = float(line[2:])
        except ValueError:
            raise FormatError(f"{path}: malformed model line {line!r}") from None
        return CalibrationModel(k, 0, 0.0)
    return fit_calibration(read_calibration_csv(path))


def _process_fruit(fruit, image, depth, model, depth_mode):
    warnings = []
    x, y, _, _ = fruit.box
    crop = crop_individual(image, fruit.box)
    local_poly = translate_polygon(fruit.pred_polygon, -x, -y)
    local_kp = KeypointPair(
        (fruit.body[0] - x, fruit.body[1] - y),
        None
        if fruit.carpopodium is None
        else (fruit.carpopodium[0] - x, fruit.carpopodium[1] - y),
    )

    theta_deg = None
    corrected = False
    try:
        pose = compute_pose(local_kp)
        theta_deg = math.degrees(pose.theta)
        _, local_poly = correct_pose(crop, local_poly, local_kp)
        corrected = True
    except PoseUnavailableError:
        warnings.append("carpopodium missing; pose correction skipped")
    except DegeneratePoseError:
        warnings.append("keypoints coincide; pose correction skipped")

    px = measure(local_poly)
    d = depth_at(depth, fruit.box, depth_mode, polygon=fruit.pred_polygon)
    metric = fuse(px, model, d)
    return {
        "id": fruit.fruit_id,
        "status": "ok",
        "pose_corrected": corrected,
        "theta_deg": theta_deg,
        "warnings": warnings,
        "pixel": {
            "width_px": px.width_px,
            "height_px": px.height_px,
            "area_px2": px.area_px2,
            "volume_px3": px.volume_px3,
        },
        "depth_cm": d,
        "metric": {
            "width_cm": metric.width_cm,
            "height_cm": metric.height_cm,
            "area_cm2": metric.area_cm2,
            "volume_cm3": metric.volume_cm3,
            "scale_px_per_cm": metric.scale_px_per_cm,
        },
    }


def cmd_phenotype(manifest_path, calibration_path, depth_mode="center"):
    """Run the full measurement pipeline over one scene manifest.

    Per fruit: crop by box, shift polygon and keypoints into crop
    coordinates, upright via the keypoint pose (skipped with a warning when
    the carpopodium is missing), measure pixel traits, sample depth, fuse to
    metric units. Fruit-level failures are recorded, not fatal; records are
    ordered by fruit id.
    """
    manifest = read_manifest(manifest_path)
    image = read_image(manifest.image)
    depth = read_depth(manifest.depth)
    if (depth.width, depth.height) != (image.width, image.height):
        raise FormatError(
            f"depth map {depth.width}x{depth.height} does not match "
            f"image {image.width}x{image.height}"
        )
    manifest.check_bounds(image.width, image.height)
    model = load_calibration(calibration_path)

    records = []
    for fruit in sorted(manifest.fruits, key=lambda f: f.fruit_id):
        try:
            records.append(_process_fruit(fruit, image, depth, model, depth_mode))
        except (MissingDepthError, ValueError) as exc:
            records.append({"id": fruit.fruit_id, "status": "error", "error": str(exc)})
    n_ok = sum(1 for r in records if r["status"] == "ok")
    return {
        "schema": SCHEMA_VERSION,
        "image": manifest.image,
        "depth": manifest.depth,
        "calibration_k": model.k,
        "depth_mode": depth_mode,
        "n_fruits": len(records),
        "n_ok": n_ok,
        "n_error": len(records) - n_ok,
        "fruits": records,
    }


def cmd_calibrate(csv_path):
    """Fit the inverse-proportional scale model from a calibration CSV."""
    samples = read_calibration_csv(csv_path)
    if not samples:
        raise FormatError(f"{csv_path}: no calibration samples")
    return fit_calibration(samples)


def cmd_stats(csv_path=None, bundled=False):
    """Box statistics of the recorded per-trait relative errors.

    Uses the error columns as recorded in the table; recomputing them from
    the (true, predicted) pairs shifts medians by under 0.05 percentage
    points but is not what the published summary quotes.
    """
    if bundled == bool(csv_path):
        raise ValueError("choose exactly one of --bundled or --csv")
    rows = load_bundled_phenotype_table() if bundled else read_phenotype_csv(csv_path)
    columns = {
        "width": [r.width_err for r in rows],
        "height": [r.height_err for r in rows],
        "area": [r.area_err for r in rows],
        "volume": [r.volume_err for r in rows],
    }
    return {trait: box_stats(columns[trait]) for trait in TRAITS}


def stats_csv(stats) -> str:
    lines = ["trait,median,q1,q3,min,max,n"]
    for trait, s in stats.items():
        lines.append(
            f"{trait},{s.median:.6g},{s.q1:.6g},{s.q3:.6g},{s.min:.6g},{s.max:.6g},{s.n}"
        )
    return "\n".join(lines) + "\n"


def _paired(pred_file, gt_file):
    pred_ids = {e.fruit_id for e in pred_file.entries}
    gt_ids = {e.fruit_id for e in gt_file.entries}
    if pred_ids != gt_ids:
        extra = sorted(pred_ids - gt_ids)
        missing = sorted(gt_ids - pred_ids)
        parts = []
        if extra:
            parts.append(f"ids only in predictions: {extra}")
        if missing:
            parts.append(f"ids only in ground truth: {missing}")
        raise FormatError("unpaired fruit ids: " + "; ".join(parts))
    gt_by_id = {e.fruit_id: e for e in gt_file.entries}
    return [(e, gt_by_id[e.fruit_id]) for e in sorted(pred_file.entries, key=lambda e: e.fruit_id)]


def _joint_grid(polys):
    max_x = max(extents(p)[1] for p in polys)
    max_y = max(extents(p)[3] for p in polys)
    return (int(math.ceil(max_x)) + 1, int(math.ceil(max_y)) + 1)


def cmd_eval(kind, pred_path, gt_path, n_samples=100):
    """Dispatch a segmentation evaluator. mee and edgeloss pair polygons by
    fruit id; map matches by mask IoU and uses the confidences."""
    pred_file = read_polygon_file(pred_path)
    gt_file = read_polygon_file(gt_path)
    grid = gt_file.grid or pred_file.grid

    if kind == "mee":
        pairs = _paired(pred_file, gt_file)
        result = mean_edge_error([(p.polygon, g.polygon) for p, g in pairs], n_samples)
        return {
            "schema": SCHEMA_VERSION,
            "metric": "mee",
            "mee_percent": result.mee,
            "pairs": result.pair_count,
            "samples_per_mask": result.samples_per_mask,
            "per_pair": [
                {"id": p.fruit_id, "value": v}
                for (p, _), v in zip(pairs, result.per_pair)
            ],
        }

    if kind == "map":
        preds = [(e.polygon, e.confidence) for e in pred_file.entries]
        gts = [e.polygon for e in gt_file.entries]
        result = detection_eval([(preds, gts)], grid=grid)
        return {
            "schema": SCHEMA_VERSION,
            "metric": "map",
            "precision": result.precision,
            "recall": result.recall,
            "map50": result.map50,
            "iou_threshold": result.iou_threshold,
            "confidence_threshold": result.confidence_threshold,
            "n_predictions": result.n_predictions,
            "n_gt": result.n_gt,
            "curve": [list(point) for point in result.curve],
        }

    if kind == "edgeloss":
        pairs = _paired(pred_file, gt_file)
        per_pair = []
        for p, g in pairs:
            pair_grid = grid or _joint_grid([p.polygon, g.polygon])
            loss = edge_loss(
                rasterize(p.polygon, *pair_grid), rasterize(g.polygon, *pair_grid)
            )
            per_pair.append({"id": p.fruit_id, "value": loss})
        mean_loss = sum(r["value"] for r in per_pair) / len(per_pair)
        return {
            "schema": SCHEMA_VERSION,
            "metric": "edgeloss",
            "edge_loss": mean_loss,
            "pairs": len(per_pair),
            "per_pair": per_pair,
        }

    raise ValueError(f"unknown eval kind {kind!r}")


def _write_json(doc, out_path):
    text = json.dumps(doc, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="phenopix",
        description="Metric fruit phenotyping and edge-aware segmentation metrics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("phenotype", help="measure fruits in a scene manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--calibration", required=True, help="model file (k=...) or calibration CSV")
    p.add_argument("--depth-mode", choices=("center", "mask-median"), default="center")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--fig", help="render a scene overlay figure to this file")

    p = sub.add_parser("calibrate", help="fit pixels_per_cm = k/depth from CSV samples")
    p.add_argument("--csv", required=True)
    p.add_argument("--out", default="calibration.model")

    p = sub.add_parser("stats", help="per-trait relative-error box statistics")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--bundled", action="store_true", help="use the packaged 31-fruit study")
    src.add_argument("--csv", help="study table in the bundled-table format")
    p.add_argument("--out", help="write the stats CSV here")
    p.add_argument("--fig", help="render the box plot to this file")

    p = sub.add_parser("eval", help="segmentation evaluators")
    p.add_argument("kind", choices=("mee", "map", "edgeloss"))
    p.add_argument("--pred", required=True, help="predicted polygons (JSON)")
    p.add_argument("--gt", required=True, help="ground-truth polygons (JSON)")
    p.add_argument("--samples", type=int, default=100, help="boundary samples per mask (mee)")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--fig", help="render a metric figure to this file")

    p = sub.add_parser("boost", help="contrast + acutance enhancement")
    p.add_argument("--in", dest="in_path", required=True, metavar="IN")
    p.add_argument("--out", required=True)
    p.add_argument("--contrast", type=float, default=1.5)
    p.add_argument("--acutance", type=float, default=1.6)
    return parser


def _run(args) -> int:
    if args.command == "phenotype":
        start = time.monotonic()
        doc = cmd_phenotype(args.manifest, args.calibration, args.depth_mode)
        text = _write_json(doc, args.out)
        if args.out:
            for rec in doc["fruits"]:
                if rec["status"] == "ok":
                    m = rec["metric"]
                    print(
                        f"fruit {rec['id']}: {m['width_cm']:.2f} x {m['height_cm']:.2f} cm, "
                        f"area {m['area_cm2']:.2f} cm2, volume {m['volume_cm3']:.2f} cm3 "
                        f"(depth {rec['depth_cm']:.1f} cm)"
                    )
                else:
                    print(f"fruit {rec['id']}: ERROR {rec['error']}")
        else:
            sys.stdout.write(text)
        if args.fig:
            manifest = read_manifest(args.manifest)
            image = read_image(manifest.image)
            reportmod.save_scene_figure(image, manifest.fruits, doc["fruits"], args.fig)
        print(f"elapsed {time.monotonic() - start:.3f}s", file=sys.stderr)
        return 0

    if args.command == "calibrate":
        model = cmd_calibrate(args.csv)
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(f"k={model.k!r}\n")
        print(f"k = {model.k:.6g} (n = {model.n_samples}, rms residual = {model.rms_residual:.6g} px/cm)")
        print(f"model written to {args.out}")
        return 0

    if args.command == "stats":
        stats = cmd_stats(csv_path=args.csv, bundled=args.bundled)
        csv_text = stats_csv(stats)
        if args.out:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
        else:
            sys.stdout.write(csv_text)
        for trait, s in stats.items():
            print(f"{trait}: median {s.median:.2f}% (q1 {s.q1:.2f}, q3 {s.q3:.2f}, n {s.n})")
        if args.fig:
            reportmod.save_stats_figure(stats, args.fig)
        return 0

    if args.command == "eval":
        doc = cmd_eval(args.kind, args.pred, args.gt, args.samples)
        text = _write_json(doc, args.out)
        if args.kind == "mee":
            print(
                f"mEE {doc['mee_percent']:.4f}% over {doc['pairs']} pairs "
                f"({doc['samples_per_mask']} samples/mask)"
            )
        elif args.kind == "map":
            print(
                f"precision {doc['precision']:.4f}  recall {doc['recall']:.4f}  "
                f"mAP50 {doc['map50']:.4f}"
            )
        else:
            print(f"edge loss {doc['edge_loss']:.6g} over {doc['pairs']} pairs")
        if not args.out:
            sys.stdout.write(text)
        if args.fig:
            if args.kind == "mee":
                ids = [r["id"] for r in doc["per_pair"]]
                values = [r["value"] for r in doc["per_pair"]]
                reportmod.save_mee_figure(ids, values, doc["mee_percent"], args.fig)
            elif args.kind == "map":
                from .metrics import DetectionEval

                result = DetectionEval(
                    doc["precision"], doc["recall"], doc["map50"],
                    doc["iou_threshold"], doc["confidence_threshold"],
                    doc["n_predictions"], doc["n_gt"],
                    [tuple(point) for point in doc["curve"]],
                )
                reportmod.save_pr_figure(result, args.fig)
            else:
                ids = [r["id"] for r in doc["per_pair"]]
                values = [r["value"] for r in doc["per_pair"]]
                reportmod.save_mee_figure(ids, values, doc["edge_loss"], args.fig)
        return 0

    if args.command == "boost":
        image = read_image(args.in_path)
        write_image(edge_boost(image, args.contrast, args.acutance), args.out)
        print(f"enhanced image written to {args.out}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _run(args)
    except (FormatError, MissingDepthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
