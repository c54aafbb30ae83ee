"""Dataset tooling for distracted-driver imagery.

Building blocks: pixel transforms (`imaging`), Haar cascade eye detection
(`haar`), face blurring (`faceblur`), skin segmentation (`skinseg`),
manifest handling and driver-disjoint splits (`manifest`), augmentation
generation and ensembling (`pipeline`), prediction scoring (`evaluation`),
plus a CLI (`cli`) and the calibration HTTP server (`server`).
"""

__version__ = "0.1.0"

from .evaluation import EvalReport, PredictionRecord, confusion, cross_entropy, evaluate, metrics
from .faceblur import BlurOutcome, BlurStatus, FaceRegionPolicy, Fallback, blur_face
from .haar import CascadeModel, DetectParams, Detection, default_eye_cascade, detect, group_rectangles, integral_image, parse_cascade
from .imaging import JitterParams, center_crop, color_jitter, gaussian_blur, load_image, normalize, resize_bilinear, rotate, save_image
from .manifest import ClassStats, DatasetManifest, Sample, class_stats, load_manifest, parse_manifest, save_manifest, split_by_driver
from .pipeline import AugmentPlan, BlurConfig, GenerationReport, classical_augment, ensemble, generate_offline, run_recipe
from .skinseg import SkinThresholds, SpaceThresholds, apply_mask, compute_skin_mask, default_thresholds, skin_segment

__all__ = [
    "AugmentPlan", "BlurConfig", "BlurOutcome", "BlurStatus", "CascadeModel",
    "ClassStats", "DatasetManifest", "DetectParams", "Detection",
    "EvalReport", "FaceRegionPolicy", "Fallback", "GenerationReport",
    "JitterParams", "PredictionRecord", "Sample", "SkinThresholds",
    "SpaceThresholds", "apply_mask", "blur_face", "center_crop",
    "class_stats", "classical_augment", "color_jitter", "compute_skin_mask",
    "confusion", "cross_entropy", "default_eye_cascade",
    "default_thresholds", "detect", "ensemble",
    "evaluate", "gaussian_blur", "generate_offline", "group_rectangles",
    "integral_image", "load_image", "load_manifest", "metrics", "normalize",
    "parse_cascade", "parse_manifest", "resize_bilinear", "rotate",
    "run_recipe", "save_image", "save_manifest", "skin_segment",
    "split_by_driver",
]
