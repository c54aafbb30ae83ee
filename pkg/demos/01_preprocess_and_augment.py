#!/usr/bin/env python3
"""Walk through the pixel-level preprocessing and classical augmentation.

Loads one fixture image, applies the standard 256->224 preprocessing chain,
then produces a rotated and a color-jittered variant the way the pipeline
does (per-image seeded randomness), and writes everything side by side.
"""

from pathlib import Path

import numpy as np

from driveraug.imaging import (
    JitterParams,
    center_crop,
    color_jitter,
    denormalize,
    load_image,
    normalize,
    resize_bilinear,
    rotate,
    save_image,
)
from driveraug.pipeline import per_image_rng

HERE = Path(__file__).resolve().parent
OUT = HERE / "output"
FIXTURE = HERE.parent / "tests" / "fixtures" / "eyes" / "full.png"


def main():
    OUT.mkdir(exist_ok=True)
    img = load_image(FIXTURE)
    print(f"input: {FIXTURE.name} {img.shape[1]}x{img.shape[0]}")

    # Standard chain: resize to 256x256, center crop 224x224, standardize.
    resized = resize_bilinear(img, 256, 256)
    cropped = center_crop(resized, 224, 224)
    tensor = normalize(cropped)
    print(f"normalized tensor: shape {tensor.shape}, "
          f"mean {tensor.mean():+.3f}, std {tensor.std():.3f}")
    save_image(denormalize(tensor), OUT / "01_preprocessed.png")

    # Rotation drawn from [-45, +45] with the same per-image rng the
    # pipeline uses, so this matches what a generation run would emit.
    rng = per_image_rng(seed=42, kind="rotated", filename=FIXTURE.name)
    angle = float(rng.uniform(-45, 45))
    save_image(rotate(cropped, angle), OUT / "01_rotated.png")
    print(f"rotated by {angle:+.1f} degrees")

    # Color jitter: brightness, contrast, saturation, hue in fixed order.
    rng = per_image_rng(seed=42, kind="jittered", filename=FIXTURE.name)
    jittered = color_jitter(cropped, JitterParams(), rng)
    save_image(jittered, OUT / "01_jittered.png")
    delta = np.abs(jittered.astype(int) - cropped.astype(int)).mean()
    print(f"jittered (mean abs change {delta:.1f}/255)")
    print(f"outputs in {OUT}")


if __name__ == "__main__":
    main()
