#!/usr/bin/env python3
"""Detect eyes with the bundled cascade, then anonymize the face.

Shows the raw detections (drawn as rectangles), the primary-eye choice,
the extrapolated face region, and the blurred result.
"""

from pathlib import Path

from driveraug.faceblur import blur_face, extrapolate_face_region, select_primary_eye
from driveraug.haar import default_eye_cascade, detect
from driveraug.imaging import load_image, save_image

HERE = Path(__file__).resolve().parent
OUT = HERE / "output"
FIXTURE = HERE.parent / "tests" / "fixtures" / "eyes" / "face300.png"


def draw_box(img, box, color):
    x, y, w, h = box
    img[y:y + h, [x, x + w - 1]] = color
    img[[y, y + h - 1], x:x + w] = color


def main():
    OUT.mkdir(exist_ok=True)
    img = load_image(FIXTURE)
    model = default_eye_cascade()
    print(f"cascade: {model.window_w}x{model.window_h} window, "
          f"{len(model.stages)} stages, {len(model.features)} features")

    dets = detect(img, model)
    print(f"{len(dets)} detections:")
    for d in dets:
        print(f"  ({d.x},{d.y}) {d.w}x{d.h}  neighbors={d.neighbor_count}")

    annotated = img.copy()
    for d in dets:
        draw_box(annotated, (d.x, d.y, d.w, d.h), (0, 255, 0))
    primary = select_primary_eye(dets)
    face = extrapolate_face_region(primary, img.shape[1], img.shape[0])
    draw_box(annotated, face, (255, 0, 0))
    save_image(annotated, OUT / "02_detections.png")
    print(f"primary eye ({primary.x},{primary.y}) {primary.w}x{primary.h} "
          f"-> face region {face}")

    outcome = blur_face(img, model)
    save_image(outcome.image, OUT / "02_blurred.png")
    print(f"blur status: {outcome.status.value}, region {outcome.region}")
    print(f"outputs in {OUT}")


if __name__ == "__main__":
    main()
