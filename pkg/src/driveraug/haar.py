"""Haar cascade parsing and multi-scale sliding-window detection.

Implements the classic boosted-stump cascade evaluation: integral images,
per-window variance normalization, early stage rejection, and grouping of
raw hits into detections. The scale pyramid scales the features over a
fixed integral image rather than rescaling the image, so a single pair of
summed-area tables serves every scale.

Only upright (non-tilted) HAAR features and stump weak classifiers are
supported; that covers the standard distributed eye/face cascade files.
"""

from __future__ import annotations

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .imaging import ensure_rgb8, grayscale


class CascadeParseError(ValueError):
    """Raised when a cascade definition file cannot be understood."""


@dataclass(frozen=True)
class FeatureRect:
    x: int
    y: int
    w: int
    h: int
    weight: float


@dataclass(frozen=True)
class HaarFeature:
    rects: tuple[FeatureRect, ...]


@dataclass(frozen=True)
class WeakClassifier:
    feature_idx: int
    node_threshold: float
    leaf_left: float
    leaf_right: float


@dataclass(frozen=True)
class Stage:
    threshold: float
    classifiers: tuple[WeakClassifier, ...]


@dataclass(frozen=True)
class CascadeModel:
    """Fully materialized stage/stump/feature tree of one cascade file."""

    window_w: int
    window_h: int
    stages: tuple[Stage, ...]
    features: tuple[HaarFeature, ...]


@dataclass(frozen=True)
class Detection:
    x: int
    y: int
    w: int
    h: int
    neighbor_count: int

    def iou(self, other: "Detection") -> float:
        """Intersection-over-union with another box."""
        x0 = max(self.x, other.x)
        y0 = max(self.y, other.y)
        x1 = min(self.x + self.w, other.x + other.w)
        y1 = min(self.y + self.h, other.y + other.h)
        inter = max(0, x1 - x0) * max(0, y1 - y0)
        union = self.w * self.h + other.w * other.h - inter
        return inter / union if union > 0 else 0.0


@dataclass(frozen=True)
class DetectParams:
    scale_factor: float = 1.1
    min_neighbors: int = 3
    min_size: tuple[int, int] | None = None     # (w, h); None = cascade window
    roi: tuple[int, int, int, int] | None = None  # (x, y, w, h)

    def __post_init__(self):
        if self.scale_factor <= 1.0:
            raise ValueError(f"scale_factor must be > 1, got {self.scale_factor}")
        if self.min_neighbors < 0:
            raise ValueError("min_neighbors must be >= 0")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _req(el, tag, where):
    child = el.find(tag)
    if child is None or child.text is None:
        raise CascadeParseError(f"missing <{tag}> in {where}")
    return child.text.strip()


def parse_cascade(xml_text: str) -> CascadeModel:
    """Parse new-style cascade XML (stageType BOOST, featureType HAAR).

    Raises CascadeParseError naming the offending element for malformed
    files, tilted features, non-HAAR feature types, or non-stump trees.
    """
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as e:
        raise CascadeParseError(f"malformed XML: {e}") from e

    cascade = root.find("cascade")
    if cascade is None:
        for child in root.iter():
            if child.get("type_id") == "opencv-haar-classifier":
                raise CascadeParseError(
                    "old-format <{}> cascade; only new-style <cascade> files "
                    "(stageType BOOST) are supported".format(child.tag))
        raise CascadeParseError("no <cascade> element found")

    stage_type = _req(cascade, "stageType", "<cascade>")
    if stage_type != "BOOST":
        raise CascadeParseError(f"unsupported <stageType> {stage_type!r}")
    feature_type = _req(cascade, "featureType", "<cascade>")
    if feature_type != "HAAR":
        raise CascadeParseError(f"unsupported <featureType> {feature_type!r}")

    window_w = int(_req(cascade, "width", "<cascade>"))
    window_h = int(_req(cascade, "height", "<cascade>"))
    if window_w <= 0 or window_h <= 0:
        raise CascadeParseError("cascade window size must be positive")

    features_el = cascade.find("features")
    if features_el is None:
        raise CascadeParseError("missing <features>")
    features = []
    for fi, feat_el in enumerate(features_el):
        tilted = feat_el.findtext("tilted", "0").strip()
        if tilted != "0":
            raise CascadeParseError(f"feature {fi}: tilted features unsupported")
        rects_el = feat_el.find("rects")
        if rects_el is None:
            raise CascadeParseError(f"feature {fi}: missing <rects>")
        rects = []
        for rect_el in rects_el:
            vals = rect_el.text.split()
            if len(vals) != 5:
                raise CascadeParseError(
                    f"feature {fi}: rect needs 5 values, got {rect_el.text!r}")
            x, y, w, h = (int(v) for v in vals[:4])
            weight = float(vals[4])
            if not math.isfinite(weight):
                raise CascadeParseError(f"feature {fi}: non-finite rect weight")
            if w <= 0 or h <= 0 or x < 0 or y < 0 \
                    or x + w > window_w or y + h > window_h:
                raise CascadeParseError(
                    f"feature {fi}: rect ({x},{y},{w},{h}) outside "
                    f"{window_w}x{window_h} base window")
            rects.append(FeatureRect(x, y, w, h, weight))
        if not 1 <= len(rects) <= 3:
            raise CascadeParseError(
                f"feature {fi}: expected 1-3 rects, got {len(rects)}")
        features.append(HaarFeature(tuple(rects)))

    stages_el = cascade.find("stages")
    if stages_el is None:
        raise CascadeParseError("missing <stages>")
    stages = []
    for si, stage_el in enumerate(stages_el):
        st_threshold = float(_req(stage_el, "stageThreshold", f"stage {si}"))
        weaks_el = stage_el.find("weakClassifiers")
        if weaks_el is None:
            raise CascadeParseError(f"stage {si}: missing <weakClassifiers>")
        weaks = []
        for wi, weak_el in enumerate(weaks_el):
            where = f"stage {si} weak {wi}"
            nodes = [float(v) for v in _req(weak_el, "internalNodes", where).split()]
            leaves = [float(v) for v in _req(weak_el, "leafValues", where).split()]
            if len(nodes) != 4 or len(leaves) != 2:
                raise CascadeParseError(
                    f"{where}: only stump trees (1 internal node, 2 leaves) "
                    "are supported")
            feat_idx = int(nodes[2])
            if not 0 <= feat_idx < len(features):
                raise CascadeParseError(f"{where}: feature index {feat_idx} "
                                        "out of range")
            weaks.append(WeakClassifier(feat_idx, nodes[3], leaves[0], leaves[1]))
        if not weaks:
            raise CascadeParseError(f"stage {si}: no weak classifiers")
        stages.append(Stage(st_threshold, tuple(weaks)))
    if not stages:
        raise CascadeParseError("cascade has no stages")

    return CascadeModel(window_w, window_h, tuple(stages), tuple(features))


def load_cascade(path: str | Path) -> CascadeModel:
    with open(path, encoding="utf-8") as f:
        return parse_cascade(f.read())


def default_eye_cascade_path() -> Path:
    """Path of the eye cascade bundled with the package."""
    return Path(resources.files("driveraug").joinpath("data/haarcascade_eye.xml"))


def default_eye_cascade() -> CascadeModel:
    return load_cascade(default_eye_cascade_path())


# ---------------------------------------------------------------------------
# Integral images
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralImage:
    """Summed-area tables: (h+1, w+1), first row/column zero.

    Entry (y, x) is the sum over all pixels strictly above and left of
    (y, x); the squared table holds sums of squared pixel values.
    """

    sum: np.ndarray
    sq_sum: np.ndarray

    @property
    def width(self) -> int:
        return self.sum.shape[1] - 1

    @property
    def height(self) -> int:
        return self.sum.shape[0] - 1

    def rect_sum(self, x, y, w, h):
        """Sum of pixels in the rect, 4 lookups. Accepts arrays for x/y."""
        return _rect_sum(self.sum, x, y, w, h)

    def rect_sq_sum(self, x, y, w, h):
        return _rect_sum(self.sq_sum, x, y, w, h)


def _rect_sum(table, x, y, w, h):
    return (table[y + h, x + w] - table[y, x + w]
            - table[y + h, x] + table[y, x])


def integral_image(gray: np.ndarray) -> IntegralImage:
    """Build summed-area tables for a 2-D image.

    Integer inputs use int64 accumulation so rect sums are exact.
    """
    a = np.asarray(gray)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"expected non-empty 2-D array, got shape {a.shape}")
    acc = np.int64 if np.issubdtype(a.dtype, np.integer) else np.float64
    a = a.astype(acc)
    h, w = a.shape
    s = np.zeros((h + 1, w + 1), dtype=acc)
    sq = np.zeros((h + 1, w + 1), dtype=acc)
    np.cumsum(np.cumsum(a, axis=0), axis=1, out=s[1:, 1:])
    np.cumsum(np.cumsum(a * a, axis=0), axis=1, out=sq[1:, 1:])
    return IntegralImage(s, sq)


# ---------------------------------------------------------------------------
# Detection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _ScaledFeature:
    # Rect corners pre-offset for direct integral-table indexing.
    xs: np.ndarray      # (nrects,) left
    ys: np.ndarray
    ws: np.ndarray
    hs: np.ndarray
    weights: np.ndarray  # (nrects,) already divided by the window area


def _scale_features(model: CascadeModel, factor: float, inv_window_area: float,
                    win_w: int, win_h: int) -> list[_ScaledFeature]:
    scaled = []
    for feat in model.features:
        n = len(feat.rects)
        xs = np.empty(n, dtype=np.int64)
        ys = np.empty(n, dtype=np.int64)
        ws = np.empty(n, dtype=np.int64)
        hs = np.empty(n, dtype=np.int64)
        weights = np.empty(n, dtype=np.float64)
        for i, r in enumerate(feat.rects):
            ws[i] = max(1, round(r.w * factor))
            hs[i] = max(1, round(r.h * factor))
            # Independent rounding can push a rect 1px past the scaled
            # window; shift it back inside rather than reading neighbors.
            xs[i] = min(round(r.x * factor), win_w - ws[i])
            ys[i] = min(round(r.y * factor), win_h - hs[i])
            weights[i] = r.weight * inv_window_area
        # Recompute the base rect's weight so the weighted areas sum to
        # zero, compensating integer rounding of the scaled rects.
        tail = float((weights[1:] * ws[1:] * hs[1:]).sum())
        weights[0] = -tail / float(ws[0] * hs[0])
        scaled.append(_ScaledFeature(xs, ys, ws, hs, weights))
    return scaled


def _scan_positions(limit: int, step: float) -> np.ndarray:
    # Grid positions round(i * step) clipped to the valid range.
    if limit < 0:
        return np.empty(0, dtype=np.int64)
    count = int(limit / step) + 2
    pos = np.unique(np.rint(np.arange(count) * step).astype(np.int64))
    return pos[pos <= limit]


def detect(img: np.ndarray, model: CascadeModel,
           params: DetectParams = DetectParams()) -> list[Detection]:
    """Run multi-scale detection over an RGB image.

    Grayscale conversion uses BT.601 luma. Returns grouped detections with
    neighbor_count >= params.min_neighbors, ordered deterministically.
    Returns an empty list when nothing is found.
    """
    ensure_rgb8(img)
    gray = np.clip(np.rint(grayscale(img)), 0, 255).astype(np.uint8)

    off_x = off_y = 0
    if params.roi is not None:
        rx, ry, rw, rh = params.roi
        if rw <= 0 or rh <= 0 or rx < 0 or ry < 0 \
                or rx + rw > gray.shape[1] or ry + rh > gray.shape[0]:
            raise ValueError(f"roi {params.roi} outside image bounds")
        gray = gray[ry:ry + rh, rx:rx + rw]
        off_x, off_y = rx, ry
    raw = _detect_raw(gray, model, params)
    dets = group_rectangles(raw, params.min_neighbors)
    # Rounding of cluster averages can nudge a box 1px past the frame;
    # clamp back inside the scanned region, then offset by the ROI origin.
    bound_w, bound_h = gray.shape[1], gray.shape[0]
    out = []
    for d in dets:
        x = min(max(d.x, 0), bound_w - d.w)
        y = min(max(d.y, 0), bound_h - d.h)
        out.append(Detection(x + off_x, y + off_y, d.w, d.h, d.neighbor_count))
    return out


def _detect_raw(gray: np.ndarray, model: CascadeModel,
                params: DetectParams) -> list[tuple[int, int, int, int]]:
    img_h, img_w = gray.shape
    ii = integral_image(gray)
    min_w, min_h = params.min_size or (model.window_w, model.window_h)

    hits: list[tuple[int, int, int, int]] = []
    factor = 1.0
    while True:
        win_w = round(model.window_w * factor)
        win_h = round(model.window_h * factor)
        if win_w > img_w or win_h > img_h:
            break
        if win_w >= min_w and win_h >= min_h:
            hits.extend(_scan_scale(ii, model, factor, win_w, win_h,
                                    img_w, img_h))
        factor *= params.scale_factor
    return hits


def _scan_scale(ii: IntegralImage, model: CascadeModel, factor: float,
                win_w: int, win_h: int, img_w: int, img_h: int):
    # Normalization window inset ~1 base pixel per side, as in the classic
    # implementation; its statistics drive the variance normalization.
    inset = round(factor)
    eq_w = round((model.window_w - 2) * factor)
    eq_h = round((model.window_h - 2) * factor)
    if eq_w <= 0 or eq_h <= 0 or inset + eq_w > win_w or inset + eq_h > win_h:
        return []
    inv_area = 1.0 / (eq_w * eq_h)
    feats = _scale_features(model, factor, inv_area, win_w, win_h)

    step = max(2.0, factor)
    xs = _scan_positions(img_w - win_w, step)
    ys = _scan_positions(img_h - win_h, step)
    if len(xs) == 0 or len(ys) == 0:
        return []
    gx, gy = np.meshgrid(xs, ys)
    px = gx.ravel()
    py = gy.ravel()

    # Per-window mean/std over the inset normalization rect; flat windows
    # (non-positive variance) are rejected outright.
    s = ii.rect_sum(px + inset, py + inset, eq_w, eq_h).astype(np.float64)
    sq = ii.rect_sq_sum(px + inset, py + inset, eq_w, eq_h).astype(np.float64)
    mean = s * inv_area
    variance = sq * inv_area - mean * mean
    alive = variance > 0.0
    px, py = px[alive], py[alive]
    vnorm = np.sqrt(variance[alive])

    table = ii.sum
    for stage in model.stages:
        if len(px) == 0:
            return []
        stage_sum = np.zeros(len(px), dtype=np.float64)
        for weak in stage.classifiers:
            f = feats[weak.feature_idx]
            val = np.zeros(len(px), dtype=np.float64)
            for i in range(len(f.weights)):
                rx = px + f.xs[i]
                ry = py + f.ys[i]
                val += f.weights[i] * _rect_sum(table, rx, ry, f.ws[i], f.hs[i])
            stage_sum += np.where(val < weak.node_threshold * vnorm,
                                  weak.leaf_left, weak.leaf_right)
        keep = stage_sum >= stage.threshold
        px, py, vnorm = px[keep], py[keep], vnorm[keep]

    return [(int(x), int(y), win_w, win_h) for x, y in zip(px, py)]


def group_rectangles(raw_hits, min_neighbors: int = 3,
                     eps: float = 0.2) -> list[Detection]:
    """Cluster similar rectangles and average each cluster.

    Two rects are similar when their corners differ by at most
    eps * (mean of the smaller sides); clusters are the transitive closure
    of that relation. Each cluster yields one Detection whose box is the
    rounded member average and whose neighbor_count is the cluster size;
    clusters smaller than min_neighbors + 1 are dropped.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    rects = [(int(x), int(y), int(w), int(h)) for x, y, w, h in raw_hits]
    n = len(rects)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def similar(a, b):
        delta = eps * 0.5 * (min(a[2], b[2]) + min(a[3], b[3]))
        return (abs(a[0] - b[0]) <= delta
                and abs(a[1] - b[1]) <= delta
                and abs(a[0] + a[2] - b[0] - b[2]) <= delta
                and abs(a[1] + a[3] - b[1] - b[3]) <= delta)

    for i in range(n):
        for j in range(i + 1, n):
            if similar(rects[i], rects[j]):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri

    clusters: dict[int, list[tuple[int, int, int, int]]] = {}
    for i in range(n):
        clusters.setdefault(find(i), []).append(rects[i])

    out = []
    for members in clusters.values():
        if len(members) < min_neighbors + 1:
            continue
        k = len(members)
        x = round(sum(m[0] for m in members) / k)
        y = round(sum(m[1] for m in members) / k)
        w = round(sum(m[2] for m in members) / k)
        h = round(sum(m[3] for m in members) / k)
        out.append(Detection(x, y, w, h, k))
    out.sort(key=lambda d: (d.y, d.x, d.w, d.h, d.neighbor_count))
    return out
