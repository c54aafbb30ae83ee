#!/usr/bin/env python3
"""Generate the annotated eye-detection fixture set under tests/fixtures/.

Source imagery is scikit-image's bundled "astronaut" portrait (Eileen
Collins, a NASA photograph in the public domain). The two eye boxes were
annotated by hand on the 512x512 base image by inspecting the pixel data:
each box is a square centered on the pupil, sized to roughly twice the
visible eye opening (brow to cheekbone), which is the convention Haar eye
detectors are trained against. Every fixture is an exact affine variant of
the base image, so its annotation is derived from the base boxes by the
same transform, not re-drawn.

The script also records, per fixture, the skin-pixel fraction under the
repo's default thresholds; tests assert those frozen values.

Deterministic: no randomness anywhere. Re-running overwrites in place.
"""

import json
from pathlib import Path

import numpy as np
import skimage.data

from driveraug.imaging import adjust_brightness, resize_bilinear, rotate, save_image
from driveraug.skinseg import compute_skin_mask, default_thresholds

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "eyes"

# Hand annotations on the 512x512 base image (x, y, w, h), left then right eye.
BASE_EYES = [(185, 86, 30, 30), (227, 87, 32, 32)]


def crop_ann(eyes, x0, y0):
    return [(x - x0, y - y0, w, h) for x, y, w, h in eyes]


def scale_ann(eyes, s):
    return [(round(x * s), round(y * s), round(w * s), round(h * s))
            for x, y, w, h in eyes]


def mirror_ann(eyes, width):
    return [(width - x - w, y, w, h) for x, y, w, h in eyes]


def rotate_ann(eyes, width, height, degrees):
    # Box centers follow the image rotation; box size is kept (valid for
    # the small angles used here).
    import math
    th = math.radians(degrees)
    c, s = math.cos(th), math.sin(th)
    cx, cy = (width - 1) / 2, (height - 1) / 2
    out = []
    for x, y, w, h in eyes:
        ex, ey = x + w / 2 - cx, y + h / 2 - cy
        nx = c * ex - s * ey + cx
        ny = s * ex + c * ey + cy
        out.append((round(nx - w / 2), round(ny - h / 2), w, h))
    return out


def build_fixtures():
    base = skimage.data.astronaut()
    face300 = base[20:320, 120:420].copy()
    eyes300 = crop_ann(BASE_EYES, 120, 20)
    face360 = base[0:360, 90:450].copy()
    face270 = base[30:300, 130:400].copy()

    fixtures = [
        ("full", base, BASE_EYES),
        ("full_dark", adjust_brightness(base, 0.85), BASE_EYES),
        ("full_bright", adjust_brightness(base, 1.15), BASE_EYES),
        ("face300", face300, eyes300),
        ("face300_rot5", rotate(face300, 5), rotate_ann(eyes300, 300, 300, 5)),
        ("face300_rotm5", rotate(face300, -5), rotate_ann(eyes300, 300, 300, -5)),
        ("face300_s256", resize_bilinear(face300, 256, 256),
         scale_ann(eyes300, 256 / 300)),
        ("face300_s384", resize_bilinear(face300, 384, 384),
         scale_ann(eyes300, 384 / 300)),
        ("face360", face360, crop_ann(BASE_EYES, 90, 0)),
        ("face270_mirror", face270[:, ::-1].copy(),
         mirror_ann(crop_ann(BASE_EYES, 130, 30), 270)),
    ]
    return fixtures


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    thresholds = default_thresholds()
    records = []
    for name, img, eyes in build_fixtures():
        filename = f"{name}.png"
        save_image(img, OUT_DIR / filename)
        frac = float(compute_skin_mask(img, thresholds).mean())
        records.append({
            "file": filename,
            "eyes": [list(b) for b in eyes],
            "skin_fraction": round(frac, 4),
        })
        print(f"{filename:22s} {img.shape[1]}x{img.shape[0]}"
              f"  skin={frac * 100:.1f}%")
    meta = {
        "source": "scikit-image astronaut (NASA photograph, public domain)",
        "annotation": "square per eye, centered on the pupil, ~2x the "
                      "visible eye opening; drawn by hand on the base image "
                      "and transformed exactly with each fixture",
        "fixtures": records,
    }
    with open(OUT_DIR / "annotations.json", "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    print(f"wrote {OUT_DIR / 'annotations.json'}")


if __name__ == "__main__":
    main()
