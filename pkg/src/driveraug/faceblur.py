"""Face anonymization: extrapolate a face region from an eye detection and
blur it in place.

The face box is derived from the primary (largest) eye detection by fixed
geometric factors: the region is centered horizontally on the eye, spans
width_factor eye-widths, and extends up_factor eye-heights above and
down_factor below the eye box. When no eye is found, a configurable
fallback either skips the image or blurs a fixed normalized region.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .haar import CascadeModel, DetectParams, Detection, detect
from .imaging import ensure_rgb8, gaussian_blur


class Fallback(str, Enum):
    SKIP = "skip"
    FIXED_REGION = "fixed_region"


class BlurStatus(str, Enum):
    EYE_FOUND = "eye_found"
    FALLBACK_USED = "fallback_used"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class FaceRegionPolicy:
    """Geometry of the face box relative to the detected eye box."""

    width_factor: float = 3.0
    up_factor: float = 1.5
    down_factor: float = 3.5
    fallback: Fallback = Fallback.SKIP
    # Normalized (x0, x1, y0, y1) used when fallback is FIXED_REGION.
    fixed_region: tuple[float, float, float, float] = (0.45, 0.95, 0.0, 0.45)

    def __post_init__(self):
        if min(self.width_factor, self.up_factor, self.down_factor) <= 0:
            raise ValueError("face region factors must be positive")
        x0, x1, y0, y1 = self.fixed_region
        if not (0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1):
            raise ValueError(f"fixed_region {self.fixed_region} outside the "
                             "unit square")


@dataclass(frozen=True)
class BlurOutcome:
    image: np.ndarray
    status: BlurStatus
    region: tuple[int, int, int, int] | None  # (x, y, w, h)

    def __post_init__(self):
        if (self.region is None) != (self.status is BlurStatus.SKIPPED):
            raise ValueError("region must be present iff status != skipped")


def select_primary_eye(dets: list[Detection]) -> Detection | None:
    """Largest-area detection; ties broken by top-most, then left-most."""
    if not dets:
        return None
    return min(dets, key=lambda d: (-(d.w * d.h), d.y, d.x))


def extrapolate_face_region(eye, img_w: int, img_h: int,
                            policy: FaceRegionPolicy = FaceRegionPolicy()
                            ) -> tuple[int, int, int, int]:
    """Face box implied by an eye box, clamped to the image bounds.

    `eye` is anything with x/y/w/h attributes or a 4-tuple.
    """
    if isinstance(eye, tuple):
        ex, ey, ew, eh = eye
    else:
        ex, ey, ew, eh = eye.x, eye.y, eye.w, eye.h
    cx = ex + ew / 2.0
    half_w = policy.width_factor * ew / 2.0
    x0 = int(round(cx - half_w))
    x1 = int(round(cx + half_w))
    y0 = int(round(ey - policy.up_factor * eh))
    y1 = int(round(ey + eh + policy.down_factor * eh))
    x0 = max(0, x0)
    y0 = max(0, y0)
    x1 = min(img_w, x1)
    y1 = min(img_h, y1)
    return (x0, y0, x1 - x0, y1 - y0)


def blur_sigma_for_region(w: int, h: int) -> float:
    """Default "appropriate variance" rule: kernel support spans the face."""
    return max(w, h) / 6.0


def blur_region(img: np.ndarray, region: tuple[int, int, int, int],
                sigma: float | None = None) -> np.ndarray:
    """Gaussian-blur only the given box; pixels outside are untouched."""
    a = ensure_rgb8(img)
    x, y, w, h = region
    if w <= 0 or h <= 0:
        raise ValueError(f"empty region {region}")
    if sigma is None:
        sigma = blur_sigma_for_region(w, h)
    out = a.copy()
    out[y:y + h, x:x + w] = gaussian_blur(a[y:y + h, x:x + w], sigma)
    return out


def blur_face(img: np.ndarray, model: CascadeModel,
              policy: FaceRegionPolicy = FaceRegionPolicy(),
              detect_params: DetectParams = DetectParams(),
              sigma: float | None = None) -> BlurOutcome:
    """Detect -> select primary eye -> extrapolate -> blur inside the region.

    Detection always runs on the original image (never on blurred output),
    so repeating the operation re-derives the same region. On no detection
    the policy's fallback applies and the outcome records which path ran.
    """
    a = ensure_rgb8(img)
    img_h, img_w = a.shape[:2]
    eye = select_primary_eye(detect(a, model, detect_params))
    if eye is not None:
        region = extrapolate_face_region(eye, img_w, img_h, policy)
        return BlurOutcome(blur_region(a, region, sigma),
                           BlurStatus.EYE_FOUND, region)
    if policy.fallback is Fallback.SKIP:
        return BlurOutcome(a.copy(), BlurStatus.SKIPPED, None)
    x0f, x1f, y0f, y1f = policy.fixed_region
    x0 = min(int(round(x0f * img_w)), img_w - 1)
    y0 = min(int(round(y0f * img_h)), img_h - 1)
    x1 = max(x0 + 1, min(int(round(x1f * img_w)), img_w))
    y1 = max(y0 + 1, min(int(round(y1f * img_h)), img_h))
    region = (x0, y0, x1 - x0, y1 - y0)
    return BlurOutcome(blur_region(a, region, sigma),
                       BlurStatus.FALLBACK_USED, region)
