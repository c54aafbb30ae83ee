"""Dataset manifests: CSV ingestion, class statistics, driver-disjoint splits.

A manifest is an ordered list of samples (subject id, class label, image
filename, provenance tag). The CSV layout follows the upstream
driver_imgs_list.csv: header `subject,classname,img`, classes c0-c9; our
outputs append a `provenance` column so every pipeline stage reads and
writes the same shape. Order is significant and preserved.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

CLASS_NAMES = tuple(f"c{i}" for i in range(10))
PROVENANCES = ("original", "rotated", "jittered", "blurred", "skinseg")


class ManifestError(ValueError):
    """Malformed manifest CSV (message includes the offending row)."""


@dataclass(frozen=True)
class Sample:
    subject: str
    label: int
    filename: str
    provenance: str = "original"

    def __post_init__(self):
        if not 0 <= self.label <= 9:
            raise ValueError(f"label {self.label} outside 0-9")
        if not self.filename:
            raise ValueError("filename must be non-empty")
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    @property
    def classname(self) -> str:
        return f"c{self.label}"


@dataclass(frozen=True)
class DatasetManifest:
    samples: tuple[Sample, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def subjects(self) -> tuple[str, ...]:
        """Distinct subject ids, sorted."""
        return tuple(sorted({s.subject for s in self.samples}))

    def counts_by_provenance(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for s in self.samples:
            out[s.provenance] = out.get(s.provenance, 0) + 1
        return out


@dataclass(frozen=True)
class ClassStats:
    counts: tuple[int, ...]          # per class 0..9
    median: float                    # over classes present in the manifest
    deviation: tuple[float, ...]     # |count - median| / median per class


def parse_manifest(csv_text: str) -> DatasetManifest:
    """Parse manifest CSV text.

    Requires header columns subject, classname, img (a provenance column is
    accepted and honored). Raises ManifestError with the 1-based row number
    for unknown classnames, duplicate filenames within a provenance, or
    missing columns.
    """
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise ManifestError("empty manifest: no header row") from None
    header = [h.strip() for h in header]
    required = ("subject", "classname", "img")
    for col in required:
        if col not in header:
            raise ManifestError(f"missing column {col!r} in header {header}")
    idx = {col: header.index(col) for col in header}
    has_prov = "provenance" in idx

    samples = []
    seen: set[tuple[str, str]] = set()
    for row_num, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue  # ignore trailing blank lines
        if len(row) < len(required):
            raise ManifestError(f"row {row_num}: expected at least "
                                f"{len(required)} columns, got {len(row)}")
        subject = row[idx["subject"]].strip()
        classname = row[idx["classname"]].strip()
        filename = row[idx["img"]].strip()
        if classname not in CLASS_NAMES:
            raise ManifestError(f"row {row_num}: unknown classname "
                                f"{classname!r}")
        if not filename:
            raise ManifestError(f"row {row_num}: empty img filename")
        provenance = "original"
        if has_prov and len(row) > idx["provenance"]:
            provenance = row[idx["provenance"]].strip() or "original"
            if provenance not in PROVENANCES:
                raise ManifestError(f"row {row_num}: unknown provenance "
                                    f"{provenance!r}")
        key = (provenance, filename)
        if key in seen:
            raise ManifestError(f"row {row_num}: duplicate filename "
                                f"{filename!r} within provenance "
                                f"{provenance!r}")
        seen.add(key)
        samples.append(Sample(subject, int(classname[1:]), filename,
                              provenance))
    return DatasetManifest(tuple(samples))


def load_manifest(path: str | Path) -> DatasetManifest:
    text = Path(path).read_text(encoding="utf-8")
    m = parse_manifest(text)
    return DatasetManifest(m.samples, {"source": str(path)})


def manifest_to_csv(m: DatasetManifest) -> str:
    """Serialize with the provenance column, LF line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["subject", "classname", "img", "provenance"])
    for s in m.samples:
        writer.writerow([s.subject, s.classname, s.filename, s.provenance])
    return buf.getvalue()


def save_manifest(m: DatasetManifest, path: str | Path) -> None:
    Path(path).write_text(manifest_to_csv(m), encoding="utf-8")


def class_stats(m: DatasetManifest) -> ClassStats:
    """Per-class counts plus relative deviation from the median count.

    The median is taken over classes that actually appear; absent classes
    keep count 0 and deviate by 100%.
    """
    if len(m) == 0:
        raise ManifestError("empty manifest")
    counts = [0] * 10
    for s in m.samples:
        counts[s.label] += 1
    present = [c for c in counts if c > 0]
    median = float(np.median(present))
    deviation = tuple(abs(c - median) / median for c in counts)
    return ClassStats(tuple(counts), median, deviation)


def fisher_yates(items: list, rng: np.random.Generator) -> list:
    """Seeded in-place Fisher-Yates shuffle, returned for convenience."""
    for i in range(len(items) - 1, 0, -1):
        j = int(rng.integers(0, i + 1))
        items[i], items[j] = items[j], items[i]
    return items


def split_by_driver(m: DatasetManifest, n_test_drivers: int = 5,
                    seed: int = 42) -> tuple[DatasetManifest, DatasetManifest]:
    """Hold out all images of `n_test_drivers` randomly chosen subjects.

    Subjects are sorted, shuffled by a seeded Fisher-Yates, and the first
    n_test_drivers become the test side, so the same seed always yields the
    same split on any platform. Train and test subject sets are disjoint by
    construction.
    """
    subjects = list(m.subjects)
    if n_test_drivers >= len(subjects):
        raise ValueError(f"n_test_drivers={n_test_drivers} must be < number "
                         f"of distinct subjects ({len(subjects)})")
    if n_test_drivers < 0:
        raise ValueError("n_test_drivers must be >= 0")
    rng = np.random.default_rng(seed)
    shuffled = fisher_yates(subjects, rng)
    test_subjects = frozenset(shuffled[:n_test_drivers])
    train = tuple(s for s in m.samples if s.subject not in test_subjects)
    test = tuple(s for s in m.samples if s.subject in test_subjects)
    meta = {"seed": seed, "n_test_drivers": n_test_drivers,
            "test_subjects": sorted(test_subjects)}
    return (DatasetManifest(train, {**m.metadata, **meta, "side": "train"}),
            DatasetManifest(test, {**m.metadata, **meta, "side": "test"}))


def with_provenance(m: DatasetManifest, provenance: str,
                    rename) -> DatasetManifest:
    """Derive a manifest whose samples keep (subject, label) but carry a new
    provenance and filenames produced by `rename(old_filename)`."""
    samples = tuple(replace(s, provenance=provenance,
                            filename=rename(s.filename))
                    for s in m.samples)
    return DatasetManifest(samples, dict(m.metadata))
