"""Pixel-level primitives shared by the whole toolkit.

Images are numpy arrays of shape (H, W, 3), dtype uint8, RGB channel order.
Every function here is pure: identical inputs (including RNG state) give
identical outputs, so callers may fan work out across threads freely.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

# ImageNet channel statistics used by the standard preprocessing chain.
IMAGENET_MEAN = (0.485, 0.456, 0.406)
IMAGENET_STD = (0.229, 0.224, 0.225)

# BT.601 luma weights, also used for grayscale conversion in detection.
_LUMA = (0.299, 0.587, 0.114)


def ensure_rgb8(img: np.ndarray) -> np.ndarray:
    """Validate that `img` is an (H, W, 3) uint8 array and return it."""
    a = np.asarray(img)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got shape {a.shape}")
    if a.dtype != np.uint8:
        raise ValueError(f"expected uint8 image, got dtype {a.dtype}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError("image must have positive height and width")
    return a


def load_image(path: str | Path) -> np.ndarray:
    """Read a JPEG/PNG file into an (H, W, 3) uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def save_image(img: np.ndarray, path: str | Path) -> None:
    """Write an (H, W, 3) uint8 RGB array as JPEG or PNG (by extension)."""
    ensure_rgb8(img)
    Image.fromarray(img, mode="RGB").save(path)


# ---------------------------------------------------------------------------
# Color space conversions
# ---------------------------------------------------------------------------

def rgb_to_hsv(p) -> tuple[float, float, float]:
    """Convert one RGB8 triple to (h, s, v) with h in [0, 360), s,v in [0, 1].

    Standard hexcone model: gray pixels get h = 0, s = 0.
    """
    r, g, b = (float(c) / 255.0 for c in p)
    mx = max(r, g, b)
    mn = min(r, g, b)
    d = mx - mn
    if d == 0.0:
        h = 0.0
    elif mx == r:
        h = 60.0 * (((g - b) / d) % 6.0)
    elif mx == g:
        h = 60.0 * ((b - r) / d + 2.0)
    else:
        h = 60.0 * ((r - g) / d + 4.0)
    if h >= 360.0:
        h -= 360.0
    s = 0.0 if mx == 0.0 else d / mx
    return (h, s, mx)


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    """Inverse of rgb_to_hsv, rounding back to 8-bit channels."""
    h = h % 360.0
    c = v * s
    x = c * (1.0 - abs((h / 60.0) % 2.0 - 1.0))
    m = v - c
    sector = int(h // 60.0) % 6
    rgb1 = [(c, x, 0.0), (x, c, 0.0), (0.0, c, x),
            (0.0, x, c), (x, 0.0, c), (c, 0.0, x)][sector]
    return tuple(int(round((u + m) * 255.0)) for u in rgb1)


def rgb_to_ycbcr(p) -> tuple[int, int, int]:
    """Full-range BT.601 conversion of one RGB8 triple, each output in [0, 255]."""
    r, g, b = (float(c) for c in p)
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    clip = lambda v: int(min(255, max(0, round(v))))
    return (clip(y), clip(cb), clip(cr))


def rgb_to_norm_rgb(p) -> tuple[float, float, float]:
    """Chromaticity (r, g, b) = channel / (R+G+B); black maps to (1/3, 1/3, 1/3)."""
    r, g, b = (float(c) for c in p)
    total = r + g + b
    if total == 0.0:
        return (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    return (r / total, g / total, b / total)


def rgb_to_hsv_image(img: np.ndarray) -> np.ndarray:
    """Vectorized rgb_to_hsv over a whole image; returns float64 (H, W, 3)."""
    a = ensure_rgb8(img).astype(np.float64) / 255.0
    r, g, b = a[..., 0], a[..., 1], a[..., 2]
    mx = a.max(axis=2)
    mn = a.min(axis=2)
    d = mx - mn
    h = np.zeros_like(mx)
    nz = d > 0
    rmax = nz & (mx == r)
    gmax = nz & ~rmax & (mx == g)
    bmax = nz & ~rmax & ~gmax
    h[rmax] = 60.0 * (((g[rmax] - b[rmax]) / d[rmax]) % 6.0)
    h[gmax] = 60.0 * ((b[gmax] - r[gmax]) / d[gmax] + 2.0)
    h[bmax] = 60.0 * ((r[bmax] - g[bmax]) / d[bmax] + 4.0)
    h[h >= 360.0] -= 360.0
    s = np.where(mx > 0, d / np.where(mx > 0, mx, 1.0), 0.0)
    return np.stack([h, s, mx], axis=2)


def hsv_to_rgb_image(hsv: np.ndarray) -> np.ndarray:
    """Vectorized hsv_to_rgb; input float (H, W, 3), output uint8 RGB."""
    h = np.mod(hsv[..., 0], 360.0)
    s = hsv[..., 1]
    v = hsv[..., 2]
    c = v * s
    x = c * (1.0 - np.abs((h / 60.0) % 2.0 - 1.0))
    m = v - c
    sector = (h // 60.0).astype(np.int64) % 6
    z = np.zeros_like(c)
    r1 = np.choose(sector, [c, x, z, z, x, c])
    g1 = np.choose(sector, [x, c, c, x, z, z])
    b1 = np.choose(sector, [z, z, x, c, c, x])
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=2)
    return np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)


def rgb_to_ycbcr_image(img: np.ndarray) -> np.ndarray:
    """Vectorized full-range BT.601 conversion; returns uint8 (H, W, 3) YCbCr."""
    a = ensure_rgb8(img).astype(np.float64)
    r, g, b = a[..., 0], a[..., 1], a[..., 2]
    y = 0.299 * r + 0.587 * g + 0.114 * b
    cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b
    cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b
    out = np.stack([y, cb, cr], axis=2)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def rgb_to_norm_rgb_image(img: np.ndarray) -> np.ndarray:
    """Vectorized chromaticity conversion; returns float64 (H, W, 3) in [0, 1]."""
    a = ensure_rgb8(img).astype(np.float64)
    total = a.sum(axis=2)
    safe = np.where(total > 0, total, 1.0)
    out = a / safe[..., None]
    out[total == 0] = 1.0 / 3.0
    return out


def grayscale(img: np.ndarray) -> np.ndarray:
    """BT.601 luma as float64 (H, W), range [0, 255]."""
    a = ensure_rgb8(img).astype(np.float64)
    return a[..., 0] * _LUMA[0] + a[..., 1] * _LUMA[1] + a[..., 2] * _LUMA[2]


# ---------------------------------------------------------------------------
# Gaussian blur
# ---------------------------------------------------------------------------

def gaussian_kernel_1d(sigma: float) -> np.ndarray:
    """Unit-sum 1-D Gaussian kernel with radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    radius = math.ceil(3.0 * sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _convolve_axis(a: np.ndarray, k: np.ndarray, axis: int) -> np.ndarray:
    # Accumulate shifted slices of the padded array; one vectorized
    # multiply-add per kernel tap keeps memory flat even for large radii.
    r = (len(k) - 1) // 2
    pad = [(0, 0)] * a.ndim
    pad[axis] = (r, r)
    padded = np.pad(a, pad, mode="reflect")
    n = a.shape[axis]
    out = np.zeros_like(a, dtype=np.float64)
    index = [slice(None)] * a.ndim
    for i, kv in enumerate(k):
        index[axis] = slice(i, i + n)
        out += kv * padded[tuple(index)]
    return out


def _blur_float(a: np.ndarray, sigma: float) -> np.ndarray:
    # Separable convolution with reflect (mirror, edge not repeated) padding.
    k = gaussian_kernel_1d(sigma)
    out = _convolve_axis(a.astype(np.float64), k, axis=0)
    return _convolve_axis(out, k, axis=1)


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Blur an RGB8 image with a normalized separable Gaussian.

    Kernel radius is ceil(3*sigma); borders are handled by reflection, so a
    constant image stays exactly constant and output values never leave the
    input's [min, max] range. Output has the same shape as the input.
    """
    a = ensure_rgb8(img).astype(np.float64)
    out = _blur_float(a, sigma)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def gaussian_blur_float(arr: np.ndarray, sigma: float) -> np.ndarray:
    """Same separable blur for float arrays (2-D or 3-D), no quantization."""
    a = np.asarray(arr, dtype=np.float64)
    if a.ndim not in (2, 3):
        raise ValueError(f"expected 2-D or 3-D array, got shape {a.shape}")
    return _blur_float(a, sigma)


# ---------------------------------------------------------------------------
# Geometric transforms
# ---------------------------------------------------------------------------

def rotate(img: np.ndarray, angle: float, fill=(0, 0, 0)) -> np.ndarray:
    """Rotate about the image center with bilinear sampling.

    Positive angles rotate counter-clockwise. Samples falling outside the
    source frame read as `fill` (default black). Output dimensions equal the
    input's; angle 0 is an exact identity.
    """
    a = ensure_rgb8(img)
    if abs(angle) > 180:
        raise ValueError(f"|angle| must be <= 180, got {angle}")
    if angle == 0:
        return a.copy()
    h, w = a.shape[:2]
    cy = (h - 1) / 2.0
    cx = (w - 1) / 2.0
    theta = math.radians(angle)
    cos_t, sin_t = math.cos(theta), math.sin(theta)

    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    # Inverse mapping: rotate output coordinates by -angle around the center.
    dx = xx - cx
    dy = yy - cy
    sx = cos_t * dx + sin_t * dy + cx
    sy = -sin_t * dx + cos_t * dy + cy
    return _bilinear_sample(a, sx, sy, fill)


def _bilinear_sample(a: np.ndarray, sx: np.ndarray, sy: np.ndarray, fill) -> np.ndarray:
    h, w = a.shape[:2]
    x0 = np.floor(sx).astype(np.int64)
    y0 = np.floor(sy).astype(np.int64)
    fx = sx - x0
    fy = sy - y0

    fill_px = np.array(fill, dtype=np.float64)

    def tap(yi, xi):
        inside = (yi >= 0) & (yi < h) & (xi >= 0) & (xi < w)
        yc = np.clip(yi, 0, h - 1)
        xc = np.clip(xi, 0, w - 1)
        vals = a[yc, xc].astype(np.float64)
        vals[~inside] = fill_px
        return vals

    w00 = ((1 - fy) * (1 - fx))[..., None]
    w01 = ((1 - fy) * fx)[..., None]
    w10 = (fy * (1 - fx))[..., None]
    w11 = (fy * fx)[..., None]
    out = (tap(y0, x0) * w00 + tap(y0, x0 + 1) * w01 +
           tap(y0 + 1, x0) * w10 + tap(y0 + 1, x0 + 1) * w11)
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def resize_bilinear(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resize with bilinear interpolation (half-pixel center convention)."""
    a = ensure_rgb8(img)
    if width < 1 or height < 1:
        raise ValueError("target dimensions must be positive")
    h, w = a.shape[:2]
    if (w, h) == (width, height):
        return a.copy()
    sx = (np.arange(width, dtype=np.float64) + 0.5) * (w / width) - 0.5
    sy = (np.arange(height, dtype=np.float64) + 0.5) * (h / height) - 0.5
    sxx, syy = np.meshgrid(np.clip(sx, 0, w - 1), np.clip(sy, 0, h - 1))
    return _bilinear_sample(a, sxx, syy, (0, 0, 0))


def center_crop(img: np.ndarray, width: int, height: int) -> np.ndarray:
    """Crop the centered width x height window."""
    a = ensure_rgb8(img)
    h, w = a.shape[:2]
    if width > w or height > h:
        raise ValueError(f"crop {width}x{height} larger than source {w}x{h}")
    x0 = (w - width) // 2
    y0 = (h - height) // 2
    return a[y0:y0 + height, x0:x0 + width].copy()


def normalize(img: np.ndarray, mean=IMAGENET_MEAN, std=IMAGENET_STD) -> np.ndarray:
    """Standardize to float32: (x/255 - mean_c) / std_c per channel."""
    a = ensure_rgb8(img).astype(np.float32) / 255.0
    mean_v = np.asarray(mean, dtype=np.float32)
    std_v = np.asarray(std, dtype=np.float32)
    return (a - mean_v) / std_v


def denormalize(t: np.ndarray, mean=IMAGENET_MEAN, std=IMAGENET_STD) -> np.ndarray:
    """Invert normalize() back to uint8 RGB."""
    mean_v = np.asarray(mean, dtype=np.float32)
    std_v = np.asarray(std, dtype=np.float32)
    x = (np.asarray(t, dtype=np.float32) * std_v + mean_v) * 255.0
    return np.clip(np.rint(x), 0, 255).astype(np.uint8)


def standard_preprocess(img: np.ndarray) -> np.ndarray:
    """Resize 256x256, center crop 224x224, standardize. Returns float32."""
    return normalize(center_crop(resize_bilinear(img, 256, 256), 224, 224))


# ---------------------------------------------------------------------------
# Photometric jitter
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JitterParams:
    """Uniform sampling ranges for the four photometric adjustments.

    Factor ranges multiply (1.0 = no change); hue range is in degrees.
    """

    brightness: tuple[float, float] = (0.8, 1.2)
    contrast: tuple[float, float] = (0.8, 1.2)
    saturation: tuple[float, float] = (0.8, 1.2)
    hue_degrees: tuple[float, float] = (-18.0, 18.0)

    def __post_init__(self):
        for name in ("brightness", "contrast", "saturation", "hue_degrees"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} range has min > max: ({lo}, {hi})")
            if name != "hue_degrees" and lo <= 0:
                raise ValueError(f"{name} factors must be positive, got {lo}")

    @classmethod
    def identity(cls) -> "JitterParams":
        return cls(brightness=(1, 1), contrast=(1, 1), saturation=(1, 1),
                   hue_degrees=(0, 0))


def adjust_brightness(img: np.ndarray, factor: float) -> np.ndarray:
    if factor == 1.0:
        return ensure_rgb8(img).copy()
    a = ensure_rgb8(img).astype(np.float64) * factor
    return np.clip(np.rint(a), 0, 255).astype(np.uint8)


def adjust_contrast(img: np.ndarray, factor: float) -> np.ndarray:
    if factor == 1.0:
        return ensure_rgb8(img).copy()
    a = ensure_rgb8(img).astype(np.float64)
    pivot = grayscale(img).mean()
    out = factor * a + (1.0 - factor) * pivot
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def adjust_saturation(img: np.ndarray, factor: float) -> np.ndarray:
    if factor == 1.0:
        return ensure_rgb8(img).copy()
    a = ensure_rgb8(img).astype(np.float64)
    gray = grayscale(img)[..., None]
    out = factor * a + (1.0 - factor) * gray
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def adjust_hue(img: np.ndarray, shift_degrees: float) -> np.ndarray:
    if shift_degrees == 0.0:
        return ensure_rgb8(img).copy()
    hsv = rgb_to_hsv_image(img)
    hsv[..., 0] = np.mod(hsv[..., 0] + shift_degrees, 360.0)
    return hsv_to_rgb_image(hsv)


def color_jitter(img: np.ndarray, params: JitterParams,
                 rng: np.random.Generator) -> np.ndarray:
    """Apply brightness, contrast, saturation, then hue, with factors drawn
    uniformly from the configured ranges.

    The four draws always happen in that fixed order, so the output is a pure
    function of (img, params, rng state).
    """
    # One draw per adjustment, always, so the rng stream does not depend on
    # which ranges happen to be degenerate. uniform(x, x) returns exactly x.
    draws = [float(rng.uniform(lo, hi))
             for lo, hi in (params.brightness, params.contrast,
                            params.saturation, params.hue_degrees)]
    out = adjust_brightness(img, draws[0])
    out = adjust_contrast(out, draws[1])
    out = adjust_saturation(out, draws[2])
    out = adjust_hue(out, draws[3])
    return out
