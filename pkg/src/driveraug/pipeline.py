"""Augmentation generation and dataset ensembling.

Offline generation (face blur, skin segmentation) and classical
augmentation (rotation, color jitter) all consume and produce manifests.
Filenames inside a produced manifest are relative to the directory the
manifest is written to, so a whole output tree stays relocatable.

Per-image randomness is derived from hash(seed, transform, filename), so
results do not depend on iteration order or worker count; manifest-level
shuffles use a seeded Fisher-Yates. Running a stage twice with the same
seed reproduces identical bytes.
"""

from __future__ import annotations

import hashlib
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .faceblur import BlurStatus, FaceRegionPolicy, blur_face
from .haar import CascadeModel, DetectParams
from .imaging import JitterParams, color_jitter, load_image, rotate, save_image
from .manifest import DatasetManifest, Sample, fisher_yates
from .skinseg import SkinThresholds, skin_segment

RECIPES = ("classical", "paper-full", "paper-literal")


@dataclass(frozen=True)
class AugmentPlan:
    enable_rotation: bool = True
    rotation_range: float = 45.0          # degrees, drawn from [-r, +r]
    enable_jitter: bool = True
    jitter: JitterParams = field(default_factory=JitterParams)
    enable_blur_set: bool = False
    enable_skinseg_set: bool = False
    seed: int = 42

    def __post_init__(self):
        if not 0 <= self.rotation_range <= 180:
            raise ValueError("rotation_range must be within [0, 180]")


@dataclass
class GenerationReport:
    total: int = 0
    generated: int = 0
    reused: int = 0
    failed: int = 0
    eye_found: int = 0
    fallback_used: int = 0
    skipped: int = 0
    errors: list = field(default_factory=list)  # (filename, message)

    def merge(self, other: "GenerationReport") -> "GenerationReport":
        return GenerationReport(
            total=self.total + other.total,
            generated=self.generated + other.generated,
            reused=self.reused + other.reused,
            failed=self.failed + other.failed,
            eye_found=self.eye_found + other.eye_found,
            fallback_used=self.fallback_used + other.fallback_used,
            skipped=self.skipped + other.skipped,
            errors=self.errors + other.errors,
        )

    def to_dict(self) -> dict:
        return {"total": self.total, "generated": self.generated,
                "reused": self.reused, "failed": self.failed,
                "eye_found": self.eye_found,
                "fallback_used": self.fallback_used, "skipped": self.skipped,
                "errors": [list(e) for e in self.errors]}


def per_image_rng(seed: int, kind: str, filename: str) -> np.random.Generator:
    """Stable per-image generator: hash(seed, kind, filename) -> PCG64."""
    digest = hashlib.sha256(f"{seed}|{kind}|{filename}".encode()).digest()
    return np.random.default_rng(int.from_bytes(digest[:8], "little"))


def derived_name(filename: str, provenance: str) -> str:
    """`<stem>__<provenance><ext>`, flattened into the output directory."""
    base = Path(filename).name
    stem, ext = os.path.splitext(base)
    return f"{stem}__{provenance}{ext}"


def _relative_original(filename: str, images_root: Path,
                       out_dir: Path) -> str:
    """Original file path re-expressed relative to the output directory."""
    return os.path.relpath(images_root / filename, out_dir)


# ---------------------------------------------------------------------------
# Classical augmentation (rotation + color jitter)
# ---------------------------------------------------------------------------

def _rotated_variant(img, plan: AugmentPlan, filename: str):
    rng = per_image_rng(plan.seed, "rotated", filename)
    angle = float(rng.uniform(-plan.rotation_range, plan.rotation_range))
    return rotate(img, angle)


def _jittered_variant(img, plan: AugmentPlan, filename: str):
    rng = per_image_rng(plan.seed, "jittered", filename)
    return color_jitter(img, plan.jitter, rng)


def classical_augment(m: DatasetManifest, plan: AugmentPlan,
                      images_root: str | Path, out_dir: str | Path,
                      workers: int | None = None,
                      subset: str = "all",
                      resume: bool = False) -> DatasetManifest:
    """Emit one rotated and/or one jittered variant per sample.

    Returns originals + variants, shuffled by the plan seed. With both
    transforms enabled the result has exactly 3x the input entries (N per
    provenance). `subset` supports the combined recipe: "all" transforms
    every sample both ways; "split" rotates the first half and jitters the
    second half of a seeded shuffle of the input, adding exactly N entries.
    With resume=True existing output files are kept as-is (per-image
    randomness is keyed by filename, so their content is already what this
    run would produce).
    """
    images_root = Path(images_root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if subset not in ("all", "split"):
        raise ValueError(f"subset must be 'all' or 'split', got {subset!r}")

    rotate_samples = list(m.samples) if plan.enable_rotation else []
    jitter_samples = list(m.samples) if plan.enable_jitter else []
    if subset == "split":
        if not (plan.enable_rotation and plan.enable_jitter):
            raise ValueError("subset='split' needs both transforms enabled")
        order = fisher_yates(list(range(len(m.samples))),
                             np.random.default_rng(plan.seed))
        half = (len(order) + 1) // 2
        rotate_samples = [m.samples[i] for i in sorted(order[:half])]
        jitter_samples = [m.samples[i] for i in sorted(order[half:])]

    def emit(sample: Sample, provenance: str) -> Sample:
        name = derived_name(sample.filename, provenance)
        if not (resume and (out_dir / name).exists()):
            img = load_image(images_root / sample.filename)
            if provenance == "rotated":
                out = _rotated_variant(img, plan, sample.filename)
            else:
                out = _jittered_variant(img, plan, sample.filename)
            save_image(out, out_dir / name)
        return replace(sample, filename=name, provenance=provenance)

    jobs = [(s, "rotated") for s in rotate_samples] + \
           [(s, "jittered") for s in jitter_samples]
    with ThreadPoolExecutor(max_workers=workers or os.cpu_count()) as pool:
        derived = list(pool.map(lambda job: emit(*job), jobs))

    originals = [replace(s, filename=_relative_original(
        s.filename, images_root, out_dir)) for s in m.samples]
    combined = originals + derived
    shuffled = fisher_yates(combined, np.random.default_rng(plan.seed))
    return DatasetManifest(tuple(shuffled),
                           {"seed": plan.seed, "stage": "classical"})


# ---------------------------------------------------------------------------
# Offline generation (face blur / skin segmentation)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlurConfig:
    model: CascadeModel
    policy: FaceRegionPolicy = field(default_factory=FaceRegionPolicy)
    detect_params: DetectParams = field(default_factory=DetectParams)
    sigma: float | None = None           # None = region-size rule


def generate_offline(m: DatasetManifest, kind: str, config,
                     images_root: str | Path, out_dir: str | Path,
                     workers: int | None = None,
                     resume: bool = False
                     ) -> tuple[DatasetManifest, GenerationReport]:
    """Produce one derived image per input sample.

    kind "blurred" takes a BlurConfig, kind "skinseg" takes SkinThresholds.
    Missing/broken source files are recorded per sample and the run
    continues; blur samples whose fallback is skip are counted but omitted
    from the returned manifest. With resume=True, samples whose output file
    already exists are not regenerated.
    """
    images_root = Path(images_root)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if kind == "blurred":
        if not isinstance(config, BlurConfig):
            raise TypeError("kind 'blurred' needs a BlurConfig")
    elif kind == "skinseg":
        if not isinstance(config, SkinThresholds):
            raise TypeError("kind 'skinseg' needs SkinThresholds")
    else:
        raise ValueError(f"kind must be 'blurred' or 'skinseg', got {kind!r}")

    def work(sample: Sample):
        # -> (sample | None, status, error | None)
        name = derived_name(sample.filename, kind)
        out_path = out_dir / name
        derived = replace(sample, filename=name, provenance=kind)
        if resume and out_path.exists():
            return derived, "reused", None
        try:
            img = load_image(images_root / sample.filename)
        except (OSError, ValueError) as e:
            return None, "failed", (sample.filename, str(e))
        if kind == "skinseg":
            save_image(skin_segment(img, config), out_path)
            return derived, "generated", None
        outcome = blur_face(img, config.model, config.policy,
                            config.detect_params, config.sigma)
        if outcome.status is BlurStatus.SKIPPED:
            return None, "skipped", None
        save_image(outcome.image, out_path)
        return derived, outcome.status.value, None

    with ThreadPoolExecutor(max_workers=workers or os.cpu_count()) as pool:
        results = list(pool.map(work, m.samples))

    report = GenerationReport(total=len(m.samples))
    samples = []
    for derived, status, error in results:
        if error is not None:
            report.failed += 1
            report.errors.append(error)
            continue
        if status == "reused":
            report.reused += 1
        elif status == "skipped":
            report.skipped += 1
            continue
        else:
            report.generated += 1
            if status == BlurStatus.EYE_FOUND.value:
                report.eye_found += 1
            elif status == BlurStatus.FALLBACK_USED.value:
                report.fallback_used += 1
        samples.append(derived)
    manifest = DatasetManifest(tuple(samples), {"stage": kind})
    return manifest, report


# ---------------------------------------------------------------------------
# Ensembling
# ---------------------------------------------------------------------------

def ensemble(manifests: list[DatasetManifest], seed: int) -> DatasetManifest:
    """Concatenate manifests and shuffle with a seeded Fisher-Yates.

    The same filename may appear under different provenances (that is how
    derived sets coexist), but a duplicate within one provenance is an
    error naming the file. No silent dedup: output size is the sum of
    input sizes.
    """
    if not manifests:
        raise ValueError("need at least one manifest")
    seen: set[tuple[str, str]] = set()
    combined: list[Sample] = []
    for m in manifests:
        for s in m.samples:
            key = (s.provenance, s.filename)
            if key in seen:
                raise ValueError(f"duplicate filename {s.filename!r} within "
                                 f"provenance {s.provenance!r}")
            seen.add(key)
            combined.append(s)
    shuffled = fisher_yates(combined, np.random.default_rng(seed))
    return DatasetManifest(tuple(shuffled), {"seed": seed,
                                             "stage": "ensemble"})


# ---------------------------------------------------------------------------
# Full recipes
# ---------------------------------------------------------------------------

def run_recipe(m: DatasetManifest, recipe: str, plan: AugmentPlan,
               blur_config: BlurConfig, thresholds: SkinThresholds,
               images_root: str | Path, out_dir: str | Path,
               workers: int | None = None
               ) -> tuple[DatasetManifest, GenerationReport]:
    """Assemble a full training set with one of the shipped recipes.

    classical      originals + rotated + jittered            (3N entries)
    paper-full     originals + classical pair from a 50/50
                   split + blurred + skin-segmented          (4N entries)
    paper-literal  classical (3N) + blurred + skin-segmented (5N entries)

    The blur stage can shrink totals when its fallback policy skips
    undetected images; totals above assume fallback fixed_region.
    """
    if recipe not in RECIPES:
        raise ValueError(f"unknown recipe {recipe!r}; pick one of {RECIPES}")
    images_root = Path(images_root)
    out_dir = Path(out_dir)

    if recipe == "classical":
        result = classical_augment(m, plan, images_root, out_dir,
                                   workers=workers)
        return result, GenerationReport(total=len(m))

    subset = "split" if recipe == "paper-full" else "all"
    classical = classical_augment(m, plan, images_root, out_dir,
                                  workers=workers, subset=subset)
    blurred, rep_blur = generate_offline(m, "blurred", blur_config,
                                         images_root, out_dir,
                                         workers=workers)
    skinseg_m, rep_skin = generate_offline(m, "skinseg", thresholds,
                                           images_root, out_dir,
                                           workers=workers)
    final = ensemble([classical, blurred, skinseg_m], seed=plan.seed)
    return final, rep_blur.merge(rep_skin)
