import json
from pathlib import Path

import numpy as np
import pytest

from driveraug.haar import default_eye_cascade, detect
from driveraug.imaging import load_image

FIXTURES = Path(__file__).parent / "fixtures"
EYE_DIR = FIXTURES / "eyes"


@pytest.fixture(scope="session")
def eye_cascade():
    return default_eye_cascade()


@pytest.fixture(scope="session")
def eye_fixtures():
    """[(name, image, [eye boxes], skin_fraction)] for the annotated set."""
    with open(EYE_DIR / "annotations.json", encoding="utf-8") as f:
        meta = json.load(f)
    out = []
    for rec in meta["fixtures"]:
        img = load_image(EYE_DIR / rec["file"])
        eyes = [tuple(b) for b in rec["eyes"]]
        out.append((rec["file"], img, eyes, rec["skin_fraction"]))
    return out


@pytest.fixture(scope="session")
def fixture_detections(eye_fixtures, eye_cascade):
    """Detection results per fixture at default params, computed once."""
    return {name: detect(img, eye_cascade)
            for name, img, _, _ in eye_fixtures}


def make_synthetic_corpus(root: Path, n_samples: int, n_subjects: int = 26,
                          size: int = 32, seed: int = 1234):
    """Write a tiny synthetic image corpus + manifest CSV under `root`.

    Images are random color blocks; filenames are flat under root. Returns
    the manifest path.
    """
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    lines = ["subject,classname,img"]
    from driveraug.imaging import save_image
    for i in range(n_samples):
        subject = f"p{(i % n_subjects):03d}"
        label = int(rng.integers(0, 10))
        fn = f"img_{i:05d}.jpg"
        img = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
        save_image(img, root / fn)
        lines.append(f"{subject},c{label},{fn}")
    manifest = root / "manifest.csv"
    manifest.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest
