"""phenopix: metric fruit phenotyping from segmentation polygons and depth
maps, plus edge-aware segmentation metrics.

The pipeline turns per-fruit polygons, body/carpopodium keypoints and a
depth map into metric width, height, silhouette area and solid-of-revolution
volume. The metrics half scores segmentation quality: relative error with
box statistics, mean edge error, mask IoU, precision/recall/mAP50, and the
Sobel-based edge loss. Everything is deterministic.
"""

from .edgeops import (
    AttentionWeights,
    GradientMap,
    acutance_step,
    attention_map,
    contrast_step,
    edge_attention_forward,
    edge_boost,
    edge_loss,
    load_attention_weights,
    save_attention_weights,
    sobel,
)
from .formats import (
    CalibrationSample,
    DepthMap,
    FormatError,
    FruitEntry,
    GroundTruthRow,
    ImageBuffer,
    SceneManifest,
    load_bundled_phenotype_table,
    read_calibration_csv,
    read_depth,
    read_image,
    read_manifest,
    read_phenotype_csv,
    read_polygon_file,
    write_depth,
    write_image,
)
from .fusion import (
    CalibrationModel,
    MetricPhenotype,
    MissingDepthError,
    depth_at,
    fit_calibration,
    fuse,
)
from .geometry import (
    PolygonMask,
    extents,
    point_to_polygon_distance,
    polygon_area,
    rasterize,
    rotate_points,
    rotate_polygon,
    sample_boundary,
    scanline_diameter,
    translate_polygon,
)
from .metrics import (
    BoxStats,
    DetectionEval,
    EdgeErrorReport,
    box_stats,
    detection_eval,
    mask_iou,
    mean_edge_error,
    relative_error,
)
from .phenotype import PixelPhenotype, crop_individual, measure
from .pose import (
    DegeneratePoseError,
    KeypointPair,
    PoseResult,
    PoseUnavailableError,
    compute_pose,
    correct_pose,
    rotate_image,
    rotate_keypoints,
)

__version__ = "0.1.0"

__all__ = [
    "AttentionWeights",
    "BoxStats",
    "CalibrationModel",
    "CalibrationSample",
    "DegeneratePoseError",
    "DepthMap",
    "DetectionEval",
    "EdgeErrorReport",
    "FormatError",
    "FruitEntry",
    "GradientMap",
    "GroundTruthRow",
    "ImageBuffer",
    "KeypointPair",
    "MetricPhenotype",
    "MissingDepthError",
    "PixelPhenotype",
    "PolygonMask",
    "PoseResult",
    "PoseUnavailableError",
    "SceneManifest",
    "acutance_step",
    "attention_map",
    "box_stats",
    "contrast_step",
    "compute_pose",
    "correct_pose",
    "crop_individual",
    "depth_at",
    "detection_eval",
    "edge_attention_forward",
    "edge_boost",
    "edge_loss",
    "extents",
    "fit_calibration",
    "fuse",
    "load_attention_weights",
    "load_bundled_phenotype_table",
    "mask_iou",
    "mean_edge_error",
    "measure",
    "point_to_polygon_distance",
    "polygon_area",
    "rasterize",
    "read_calibration_csv",
    "read_depth",
    "read_image",
    "read_manifest",
    "read_phenotype_csv",
    "read_polygon_file",
    "relative_error",
    "rotate_image",
    "rotate_keypoints",
    "rotate_points",
    "rotate_polygon",
    "sample_boundary",
    "save_attention_weights",
    "scanline_diameter",
    "sobel",
    "translate_polygon",
    "write_depth",
    "write_image",
]
