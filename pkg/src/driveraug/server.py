"""HTTP service behind the interactive skin-threshold calibration UI.

Previews are stateless: the thresholds travel urlencoded with every
request, so a preview is a pure function of (image, thresholds, mode) and
identical requests return byte-identical PNGs. Preset writes go through an
atomic rename; the server never writes outside the preset directory.
"""

from __future__ import annotations

import io
import json
import os
import re
import tempfile
from pathlib import Path

import numpy as np
from fastapi import FastAPI, HTTPException, Query, Request, Response
from PIL import Image

from .imaging import resize_bilinear
from .manifest import load_manifest
from .skinseg import SkinThresholds, apply_mask, compute_skin_mask

PREVIEW_MAX_SIDE = 512
PRESET_NAME_RE = re.compile(r"^[a-z0-9][a-z0-9_-]*$")


def _png_bytes(arr: np.ndarray, mode: str = "RGB") -> bytes:
    buf = io.BytesIO()
    Image.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def create_app(images_root: Path, manifest_path: Path, preset_dir: Path,
               static_dir: Path | None = None) -> FastAPI:
    app = FastAPI(title="skin-threshold calibration")
    manifest = load_manifest(manifest_path)
    preset_dir = Path(preset_dir)
    preset_dir.mkdir(parents=True, exist_ok=True)

    # Previews are downscaled once per image and cached; thresholds vary per
    # request, segmentation does not pay the decode cost every time.
    preview_cache: dict[int, np.ndarray] = {}

    def load_preview_image(image_id: int) -> np.ndarray:
        if image_id in preview_cache:
            return preview_cache[image_id]
        if not images_root.is_dir():
            raise HTTPException(404, detail="images root missing")
        if not 0 <= image_id < len(manifest.samples):
            raise HTTPException(404, detail=f"unknown image id {image_id}")
        path = images_root / manifest.samples[image_id].filename
        if not path.is_file():
            raise HTTPException(404, detail=f"image file missing: "
                                            f"{manifest.samples[image_id].filename}")
        from .imaging import load_image
        img = load_image(path)
        h, w = img.shape[:2]
        long_side = max(w, h)
        if long_side > PREVIEW_MAX_SIDE:
            scale = PREVIEW_MAX_SIDE / long_side
            img = resize_bilinear(img, max(1, round(w * scale)),
                                  max(1, round(h * scale)))
        preview_cache[image_id] = img
        return img

    @app.get("/api/images")
    def list_images(offset: int = Query(0, ge=0),
                    limit: int = Query(100, ge=1, le=1000),
                    class_filter: str | None = Query(None, alias="class")):
        if not images_root.is_dir():
            raise HTTPException(404, detail="images root missing")
        items = [{"id": i, "filename": s.filename, "class": s.classname}
                 for i, s in enumerate(manifest.samples)
                 if class_filter is None or s.classname == class_filter]
        return {"total": len(items), "items": items[offset:offset + limit]}

    @app.get("/api/preview")
    def preview(id: int, t: str, mode: str = "segmented"):
        if mode not in ("segmented", "mask", "original"):
            raise HTTPException(400, detail=f"unknown mode {mode!r}")
        try:
            thresholds = SkinThresholds.from_json(t)
        except (ValueError, KeyError, TypeError) as e:
            raise HTTPException(400, detail=f"invalid thresholds: {e}")
        img = load_preview_image(id)
        headers = {}
        if mode == "original":
            body = _png_bytes(img)
        else:
            try:
                mask = compute_skin_mask(img, thresholds)
            except ValueError as e:
                raise HTTPException(400, detail=str(e))
            headers["X-Skin-Fraction"] = f"{float(mask.mean()):.4f}"
            if mode == "mask":
                body = _png_bytes(mask.astype(np.uint8) * 255, mode="L")
            else:
                body = _png_bytes(apply_mask(img, mask))
        return Response(content=body, media_type="image/png",
                        headers=headers)

    def _preset_path(name: str) -> Path:
        if not PRESET_NAME_RE.match(name):
            raise HTTPException(400, detail="preset names must be slugs "
                                            "([a-z0-9_-])")
        return preset_dir / f"{name}.json"

    @app.get("/api/presets")
    def list_presets():
        names = sorted(p.stem for p in preset_dir.glob("*.json"))
        return {"presets": names}

    @app.get("/api/presets/{name}")
    def get_preset(name: str):
        path = _preset_path(name)
        if not path.is_file():
            raise HTTPException(404, detail=f"no preset {name!r}")
        return json.loads(path.read_text(encoding="utf-8"))

    @app.put("/api/presets/{name}")
    async def put_preset(name: str, request: Request):
        path = _preset_path(name)
        try:
            body = await request.json()
            thresholds = SkinThresholds.from_dict(body)
        except (ValueError, KeyError, TypeError) as e:
            raise HTTPException(400, detail=f"invalid thresholds: {e}")
        fd, tmp = tempfile.mkstemp(dir=preset_dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(thresholds.to_json() + "\n")
            os.replace(tmp, path)
        finally:
            if os.path.exists(tmp):
                os.unlink(tmp)
        return {"saved": name}

    if static_dir is not None and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="ui")

    return app
