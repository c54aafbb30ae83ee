#!/usr/bin/env python3
"""End-to-end dataset flow on a synthetic corpus: driver-disjoint split,
classical augmentation, offline skin segmentation, then ensembling.

Everything is seeded, so re-running reproduces identical manifests.
"""

import tempfile
from pathlib import Path

import numpy as np

from driveraug.imaging import save_image
from driveraug.manifest import class_stats, load_manifest, save_manifest, split_by_driver
from driveraug.pipeline import AugmentPlan, classical_augment, ensemble, generate_offline
from driveraug.skinseg import default_thresholds


def make_corpus(root: Path, n=60, subjects=10):
    rng = np.random.default_rng(0)
    lines = ["subject,classname,img"]
    for i in range(n):
        img = rng.integers(0, 256, size=(32, 32, 3), dtype=np.uint8)
        save_image(img, root / f"img_{i:04d}.jpg")
        lines.append(f"p{i % subjects:03d},c{int(rng.integers(0, 10))},"
                     f"img_{i:04d}.jpg")
    path = root / "manifest.csv"
    path.write_text("\n".join(lines) + "\n")
    return path


def main():
    work = Path(tempfile.mkdtemp(prefix="driveraug_demo_"))
    manifest_path = make_corpus(work)
    m = load_manifest(manifest_path)
    print(f"corpus: {len(m)} samples, {len(m.subjects)} drivers  ({work})")
    stats = class_stats(m)
    print(f"class counts: {stats.counts} (median {stats.median:g})")

    train, test = split_by_driver(m, n_test_drivers=2, seed=42)
    overlap = set(train.subjects) & set(test.subjects)
    print(f"split: {len(train)} train / {len(test)} test, "
          f"driver overlap = {sorted(overlap) or 'none'}")

    classical = classical_augment(train, AugmentPlan(seed=42), work,
                                  work / "classical")
    print(f"classical augmentation: {len(train)} -> {len(classical)} "
          f"({classical.counts_by_provenance()})")

    seg, report = generate_offline(train, "skinseg", default_thresholds(),
                                   work, work / "skinseg")
    print(f"skin segmentation: generated {report.generated}, "
          f"failed {report.failed}")

    combined = ensemble([classical, seg], seed=42)
    save_manifest(combined, work / "combined.csv")
    print(f"ensembled training set: {len(combined)} entries "
          f"-> {work / 'combined.csv'}")


if __name__ == "__main__":
    main()
