"""Skin segmentation by multi-color-space thresholding.

A pixel counts as skin when it falls inside the configured range of every
enabled color space (RGB, HSV, YCbCr, normalized RGB); everything else is
blacked out. Hue ranges may wrap around 0/360. An optional smoothing pass
blurs the binary mask as reals and re-thresholds it to remove speckle.

Known limitation, inherited from color-threshold skin detectors in
general: ranges tuned on light skin under uniform lighting transfer poorly
to darker skin tones and unusual illumination. Re-calibrate per dataset
(see the calibration server/UI).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .imaging import (
    ensure_rgb8,
    gaussian_blur_float,
    rgb_to_hsv_image,
    rgb_to_norm_rgb_image,
    rgb_to_ycbcr_image,
)

SPACES = ("rgb", "hsv", "ycbcr", "norm_rgb")

# Channel domains, used for validation and by UI slider scales.
CHANNEL_DOMAINS = {
    "rgb": ((0, 255), (0, 255), (0, 255)),
    "hsv": ((0, 360), (0, 1), (0, 1)),
    "ycbcr": ((0, 255), (0, 255), (0, 255)),
    "norm_rgb": ((0, 1), (0, 1), (0, 1)),
}


@dataclass(frozen=True)
class SpaceThresholds:
    """Per-channel inclusive [min, max] ranges for one color space."""

    enabled: bool
    channels: tuple[tuple[float, float], tuple[float, float],
                    tuple[float, float]]


def _full_range(space):
    return SpaceThresholds(False, tuple((lo, hi) for lo, hi
                                        in CHANNEL_DOMAINS[space]))


@dataclass(frozen=True)
class SkinThresholds:
    """Threshold configuration across all supported color spaces.

    The hue channel (HSV channel 0) may have min > max, meaning the range
    wraps around 360 -> 0; every other channel requires min <= max.
    """

    rgb: SpaceThresholds = field(default_factory=lambda: _full_range("rgb"))
    hsv: SpaceThresholds = field(default_factory=lambda: _full_range("hsv"))
    ycbcr: SpaceThresholds = field(default_factory=lambda: _full_range("ycbcr"))
    norm_rgb: SpaceThresholds = field(
        default_factory=lambda: _full_range("norm_rgb"))
    mask_smooth_sigma: float = 0.0
    mask_keep_threshold: float = 0.5

    def __post_init__(self):
        for space in SPACES:
            st = getattr(self, space)
            if len(st.channels) != 3:
                raise ValueError(f"{space}: need 3 channel ranges")
            for ci, (lo, hi) in enumerate(st.channels):
                wrap_ok = space == "hsv" and ci == 0
                if lo > hi and not wrap_ok:
                    raise ValueError(
                        f"{space} channel {ci}: min {lo} > max {hi}")
        if self.mask_smooth_sigma < 0:
            raise ValueError("mask_smooth_sigma must be >= 0")
        if not 0.0 <= self.mask_keep_threshold <= 1.0:
            raise ValueError("mask_keep_threshold must be in [0, 1]")

    @property
    def enabled_spaces(self) -> tuple[str, ...]:
        return tuple(s for s in SPACES if getattr(self, s).enabled)

    # -- JSON round trip -----------------------------------------------

    def to_dict(self) -> dict:
        d = {}
        for space in SPACES:
            st = getattr(self, space)
            d[space] = {"enabled": st.enabled,
                        "channels": [list(c) for c in st.channels]}
        d["mask_smooth_sigma"] = self.mask_smooth_sigma
        d["mask_keep_threshold"] = self.mask_keep_threshold
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SkinThresholds":
        kwargs = {}
        for space in SPACES:
            if space not in d:
                continue
            sd = d[space]
            channels = tuple(tuple(float(v) for v in c)
                             for c in sd["channels"])
            kwargs[space] = SpaceThresholds(bool(sd["enabled"]), channels)
        kwargs["mask_smooth_sigma"] = float(d.get("mask_smooth_sigma", 0.0))
        kwargs["mask_keep_threshold"] = float(d.get("mask_keep_threshold", 0.5))
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SkinThresholds":
        return cls.from_dict(json.loads(text))


def load_thresholds(path: str | Path) -> SkinThresholds:
    with open(path, encoding="utf-8") as f:
        return SkinThresholds.from_json(f.read())


def save_thresholds(t: SkinThresholds, path: str | Path) -> None:
    Path(path).write_text(t.to_json() + "\n", encoding="utf-8")


def default_thresholds_path() -> Path:
    from importlib import resources
    return Path(resources.files("driveraug").joinpath("data/skin_default.json"))


def default_thresholds() -> SkinThresholds:
    """Repo default ranges, calibrated on the bundled fixture images."""
    return load_thresholds(default_thresholds_path())


# ---------------------------------------------------------------------------
# Masking
# ---------------------------------------------------------------------------

def _space_values(img: np.ndarray, space: str) -> np.ndarray:
    if space == "rgb":
        return img.astype(np.float64)
    if space == "hsv":
        return rgb_to_hsv_image(img)
    if space == "ycbcr":
        return rgb_to_ycbcr_image(img).astype(np.float64)
    if space == "norm_rgb":
        return rgb_to_norm_rgb_image(img)
    raise ValueError(f"unknown color space {space!r}")


def compute_skin_mask(img: np.ndarray, t: SkinThresholds) -> np.ndarray:
    """Boolean (H, W) mask: True where the pixel passes every enabled space.

    Raises ValueError when no space is enabled.
    """
    a = ensure_rgb8(img)
    if not t.enabled_spaces:
        raise ValueError("at least one color space must be enabled")
    mask = np.ones(a.shape[:2], dtype=bool)
    for space in t.enabled_spaces:
        vals = _space_values(a, space)
        st = getattr(t, space)
        for ci, (lo, hi) in enumerate(st.channels):
            c = vals[..., ci]
            if lo > hi:  # wrap-around interval (hue only, enforced above)
                mask &= (c >= lo) | (c <= hi)
            else:
                mask &= (c >= lo) & (c <= hi)
    if t.mask_smooth_sigma > 0:
        smooth = gaussian_blur_float(mask.astype(np.float64),
                                     t.mask_smooth_sigma)
        mask = smooth >= t.mask_keep_threshold
    return mask


def apply_mask(img: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Copy skin pixels verbatim; set non-skin pixels to black."""
    a = ensure_rgb8(img)
    m = np.asarray(mask)
    if m.shape != a.shape[:2]:
        raise ValueError(
            f"mask shape {m.shape} != image shape {a.shape[:2]}")
    out = np.zeros_like(a)
    out[m] = a[m]
    return out


def skin_segment(img: np.ndarray, t: SkinThresholds) -> np.ndarray:
    """compute_skin_mask followed by apply_mask."""
    return apply_mask(img, compute_skin_mask(img, t))


def skin_fraction(img: np.ndarray, t: SkinThresholds) -> float:
    """Fraction of pixels classified as skin, in [0, 1]."""
    mask = compute_skin_mask(img, t)
    return float(mask.mean())
