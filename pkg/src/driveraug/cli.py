"""Command-line entry point: every pipeline stage as a subcommand.

Configuration can come from a JSON file (--config) with per-flag
overrides; flags always win. Every stage writes a machine-readable
run_summary.json next to its outputs recording the command, seed, input
hashes, counts, and wall time, so any run can be reproduced from its
summary alone.

Exit codes: 0 success, 1 partial generation failure, 2 bad config/input.
"""

from __future__ import annotations

import hashlib
import json
import sys
import time
from pathlib import Path

import click

from . import evaluation as ev
from . import manifest as mf
from . import pipeline as pl
from .faceblur import FaceRegionPolicy, Fallback
from .haar import DetectParams, default_eye_cascade_path, load_cascade
from .imaging import JitterParams
from .skinseg import default_thresholds_path, load_thresholds

SUMMARY_SCHEMA_VERSION = 1


class ConfigError(click.ClickException):
    exit_code = 2


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        return json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}")


def _cfg(ctx_cfg: dict, flag_value, key: str, default):
    """Flag beats config file beats default."""
    if flag_value is not None:
        return flag_value
    if key in ctx_cfg:
        return ctx_cfg[key]
    return default


def _require_file(path: str, what: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"{what} not found: {path}")
    return p


def _load_manifest_or_die(path: str) -> mf.DatasetManifest:
    p = _require_file(path, "manifest")
    try:
        return mf.load_manifest(p)
    except mf.ManifestError as e:
        raise ConfigError(f"bad manifest {path}: {e}")


def _plan_from_config(cfg: dict, seed: int) -> pl.AugmentPlan:
    plan_cfg = dict(cfg.get("augment_plan", {}))
    jitter = JitterParams(**{k: tuple(v) for k, v in
                             plan_cfg.pop("jitter", {}).items()})
    try:
        return pl.AugmentPlan(seed=seed, jitter=jitter, **plan_cfg)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad augment_plan: {e}")


def _policy_from_config(cfg: dict, fallback: str | None) -> FaceRegionPolicy:
    pol_cfg = dict(cfg.get("face_policy", {}))
    if fallback is not None:
        pol_cfg["fallback"] = fallback
    if "fallback" in pol_cfg:
        pol_cfg["fallback"] = Fallback(pol_cfg["fallback"])
    if "fixed_region" in pol_cfg:
        pol_cfg["fixed_region"] = tuple(pol_cfg["fixed_region"])
    try:
        return FaceRegionPolicy(**pol_cfg)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad face_policy: {e}")


def _detect_params_from_config(cfg: dict) -> DetectParams:
    dp_cfg = dict(cfg.get("detect_params", {}))
    if "min_size" in dp_cfg and dp_cfg["min_size"] is not None:
        dp_cfg["min_size"] = tuple(dp_cfg["min_size"])
    if "roi" in dp_cfg and dp_cfg["roi"] is not None:
        dp_cfg["roi"] = tuple(dp_cfg["roi"])
    try:
        return DetectParams(**dp_cfg)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad detect_params: {e}")


def _write_summary(out_dir: Path, command: str, seed, inputs: dict,
                   counts: dict, started: float, extra: dict | None = None):
    out_dir.mkdir(parents=True, exist_ok=True)
    summary = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "command": command,
        "seed": seed,
        "inputs": {str(k): _sha256(Path(k)) for k in inputs},
        "counts": counts,
        "wall_time_s": round(time.monotonic() - started, 3),
    }
    if extra:
        summary.update(extra)
    path = out_dir / "run_summary.json"
    path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    return path


@click.group()
@click.option("--config", "config_path", type=str, default=None,
              help="JSON config file; flags override its values.")
@click.pass_context
def main(ctx, config_path):
    """Dataset tooling for distracted-driver imagery."""
    ctx.ensure_object(dict)
    ctx.obj["cfg"] = _load_config(config_path)


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------

@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@click.option("--json-out", type=str, default=None,
              help="also write the stats as JSON")
@click.pass_context
def stats(ctx, manifest_path, json_out):
    """Per-class counts and deviation from the median class size."""
    m = _load_manifest_or_die(manifest_path)
    try:
        st = mf.class_stats(m)
    except mf.ManifestError as e:
        raise ConfigError(str(e))
    click.echo(f"samples: {len(m)}   subjects: {len(m.subjects)}   "
               f"median class size: {st.median:g}")
    click.echo("class  count  deviation-from-median")
    for c in range(10):
        click.echo(f"c{c}     {st.counts[c]:<6d} {st.deviation[c]:6.1%}")
    if json_out:
        payload = {"samples": len(m), "subjects": len(m.subjects),
                   "median": st.median, "counts": list(st.counts),
                   "deviation": list(st.deviation)}
        Path(json_out).write_text(json.dumps(payload, indent=2) + "\n",
                                  encoding="utf-8")


# ---------------------------------------------------------------------------
# split
# ---------------------------------------------------------------------------

@main.command()
@click.argument("manifest_path", metavar="MANIFEST")
@click.option("--test-drivers", type=int, default=None,
              help="number of held-out subjects [default 5]")
@click.option("--seed", type=int, default=None)
@click.option("--out-dir", type=str, default=None,
              help="directory for train.csv / test.csv [default .]")
@click.pass_context
def split(ctx, manifest_path, test_drivers, seed, out_dir):
    """Driver-disjoint train/test split."""
    cfg = ctx.obj["cfg"]
    started = time.monotonic()
    n = int(_cfg(cfg, test_drivers, "test_drivers", 5))
    seed = int(_cfg(cfg, seed, "seed", 42))
    out = Path(_cfg(cfg, out_dir, "output_root", "."))
    m = _load_manifest_or_die(manifest_path)
    try:
        train, test = mf.split_by_driver(m, n, seed=seed)
    except ValueError as e:
        raise ConfigError(str(e))
    out.mkdir(parents=True, exist_ok=True)
    mf.save_manifest(train, out / "train.csv")
    mf.save_manifest(test, out / "test.csv")
    _write_summary(out, "split", seed, {manifest_path: None},
                   {"train": len(train), "test": len(test),
                    "test_subjects": train.metadata["test_subjects"]},
                   started)
    click.echo(f"train: {len(train)} samples, test: {len(test)} samples "
               f"({n} subjects: {', '.join(train.metadata['test_subjects'])})")


# ---------------------------------------------------------------------------
# augment group
# ---------------------------------------------------------------------------

@main.group()
def augment():
    """Generate augmentation sets (classical | blur | skinseg | ensemble)."""


def _common_generate_options(fn):
    fn = click.option("--images-root", type=str, default=None,
                      help="directory input filenames resolve against "
                           "[default: manifest's directory]")(fn)
    fn = click.option("--out", "out_dir", type=str, required=True,
                      help="output directory for images + manifest.csv")(fn)
    fn = click.option("--seed", type=int, default=None)(fn)
    fn = click.option("--workers", type=int, default=None)(fn)
    return fn


def _images_root_for(manifest_path: str, images_root: str | None,
                     cfg: dict) -> Path:
    root = _cfg(cfg, images_root, "images_root", None)
    if root is None:
        root = Path(manifest_path).resolve().parent
    return Path(root)


@augment.command("classical")
@click.argument("manifest_path", metavar="MANIFEST")
@_common_generate_options
@click.option("--plan", "plan_path", type=str, default=None,
              help="JSON file with augment_plan fields")
@click.option("--resume", is_flag=True, help="keep existing output files")
@click.pass_context
def augment_classical(ctx, manifest_path, images_root, out_dir, seed,
                      workers, plan_path, resume):
    """Rotation + color jitter; output is 3x the input manifest."""
    cfg = dict(ctx.obj["cfg"])
    if plan_path:
        cfg["augment_plan"] = _load_config(plan_path)
    started = time.monotonic()
    seed = int(_cfg(cfg, seed, "seed", 42))
    workers = _cfg(cfg, workers, "workers", None)
    m = _load_manifest_or_die(manifest_path)
    root = _images_root_for(manifest_path, images_root, cfg)
    plan = _plan_from_config(cfg, seed)
    out = Path(out_dir)
    try:
        result = pl.classical_augment(m, plan, root, out, workers=workers,
                                      resume=resume)
    except OSError as e:
        raise ConfigError(f"cannot write outputs: {e}")
    mf.save_manifest(result, out / "manifest.csv")
    _write_summary(out, "augment classical", seed, {manifest_path: None},
                   {"input": len(m), "output": len(result),
                    **result.counts_by_provenance()}, started)
    click.echo(f"wrote {len(result)} entries to {out / 'manifest.csv'}")


def _finish_offline(kind, m, result, report, out, seed, manifest_path,
                    started):
    mf.save_manifest(result, out / "manifest.csv")
    _write_summary(out, f"augment {kind}", seed, {manifest_path: None},
                   {"input": len(m), "output": len(result),
                    **report.to_dict()}, started)
    click.echo(f"{kind}: generated={report.generated} reused={report.reused} "
               f"skipped={report.skipped} failed={report.failed}")
    if report.failed:
        for fn, msg in report.errors[:10]:
            click.echo(f"  failed {fn}: {msg}", err=True)
        sys.exit(1)


@augment.command("blur")
@click.argument("manifest_path", metavar="MANIFEST")
@_common_generate_options
@click.option("--cascade", "cascade_path", type=str, default=None,
              help="Haar cascade XML [default: bundled eye cascade]")
@click.option("--fallback", type=click.Choice(["skip", "fixed_region"]),
              default=None, help="behavior when no eye is found")
@click.option("--resume", is_flag=True, help="keep existing output files")
@click.pass_context
def augment_blur(ctx, manifest_path, images_root, out_dir, seed, workers,
                 cascade_path, fallback, resume):
    """Face-blurred copies driven by eye detection."""
    cfg = ctx.obj["cfg"]
    started = time.monotonic()
    seed = int(_cfg(cfg, seed, "seed", 42))
    workers = _cfg(cfg, workers, "workers", None)
    cascade_path = _cfg(cfg, cascade_path, "cascade",
                        str(default_eye_cascade_path()))
    try:
        model = load_cascade(_require_file(cascade_path, "cascade file"))
    except ValueError as e:
        raise ConfigError(f"bad cascade: {e}")
    m = _load_manifest_or_die(manifest_path)
    root = _images_root_for(manifest_path, images_root, cfg)
    config = pl.BlurConfig(model=model,
                           policy=_policy_from_config(cfg, fallback),
                           detect_params=_detect_params_from_config(cfg))
    out = Path(out_dir)
    result, report = pl.generate_offline(m, "blurred", config, root, out,
                                         workers=workers, resume=resume)
    _finish_offline("blur", m, result, report, out, seed, manifest_path,
                    started)


@augment.command("skinseg")
@click.argument("manifest_path", metavar="MANIFEST")
@_common_generate_options
@click.option("--thresholds", "thresholds_path", type=str, default=None,
              help="threshold preset JSON [default: bundled preset]")
@click.option("--resume", is_flag=True, help="keep existing output files")
@click.pass_context
def augment_skinseg(ctx, manifest_path, images_root, out_dir, seed, workers,
                    thresholds_path, resume):
    """Skin-segmented copies (non-skin pixels blacked out)."""
    cfg = ctx.obj["cfg"]
    started = time.monotonic()
    seed = int(_cfg(cfg, seed, "seed", 42))
    workers = _cfg(cfg, workers, "workers", None)
    thresholds_path = _cfg(cfg, thresholds_path, "skin_thresholds",
                           str(default_thresholds_path()))
    try:
        thresholds = load_thresholds(
            _require_file(thresholds_path, "thresholds preset"))
    except ValueError as e:
        raise ConfigError(f"bad thresholds: {e}")
    m = _load_manifest_or_die(manifest_path)
    root = _images_root_for(manifest_path, images_root, cfg)
    out = Path(out_dir)
    result, report = pl.generate_offline(m, "skinseg", thresholds, root, out,
                                         workers=workers, resume=resume)
    _finish_offline("skinseg", m, result, report, out, seed, manifest_path,
                    started)


@click.command("ensemble")
@click.argument("manifest_paths", metavar="MANIFEST...", nargs=-1,
                required=True)
@click.option("--out", "out_path", type=str, required=True,
              help="output manifest CSV path")
@click.option("--seed", type=int, default=None)
@click.pass_context
def ensemble_cmd(ctx, manifest_paths, out_path, seed):
    """Concatenate manifests and shuffle deterministically."""
    cfg = ctx.obj["cfg"]
    started = time.monotonic()
    seed = int(_cfg(cfg, seed, "seed", 42))
    out_path = Path(out_path)
    out_dir = out_path.resolve().parent
    rebased = []
    for path in manifest_paths:
        m = _load_manifest_or_die(path)
        base = Path(path).resolve().parent
        rebased.append(mf.DatasetManifest(tuple(
            mf.Sample(s.subject, s.label,
                      _relpath(base / s.filename, out_dir), s.provenance)
            for s in m.samples)))
    try:
        combined = pl.ensemble(rebased, seed=seed)
    except ValueError as e:
        raise ConfigError(str(e))
    out_dir.mkdir(parents=True, exist_ok=True)
    mf.save_manifest(combined, out_path)
    _write_summary(out_dir, "ensemble", seed,
                   {p: None for p in manifest_paths},
                   {"inputs": [len(_load_manifest_or_die(p))
                               for p in manifest_paths],
                    "output": len(combined)}, started)
    click.echo(f"wrote {len(combined)} entries to {out_path}")


def _relpath(path: Path, start: Path) -> str:
    import os
    return os.path.relpath(path, start)


main.add_command(ensemble_cmd)          # top-level `driveraug ensemble`
augment.add_command(ensemble_cmd)       # and `driveraug augment ensemble`


@augment.command("recipe")
@click.argument("manifest_path", metavar="MANIFEST")
@_common_generate_options
@click.option("--recipe", "recipe_name",
              type=click.Choice(list(pl.RECIPES)), default="paper-full")
@click.option("--fallback", type=click.Choice(["skip", "fixed_region"]),
              default="fixed_region")
@click.option("--plan", "plan_path", type=str, default=None,
              help="JSON file with augment_plan fields")
@click.pass_context
def augment_recipe(ctx, manifest_path, images_root, out_dir, seed, workers,
                   recipe_name, fallback, plan_path):
    """Full combined training set (classical + blur + skinseg)."""
    cfg = dict(ctx.obj["cfg"])
    if plan_path:
        cfg["augment_plan"] = _load_config(plan_path)
    started = time.monotonic()
    seed = int(_cfg(cfg, seed, "seed", 42))
    workers = _cfg(cfg, workers, "workers", None)
    m = _load_manifest_or_die(manifest_path)
    root = _images_root_for(manifest_path, images_root, cfg)
    plan = _plan_from_config(cfg, seed)
    blur_config = pl.BlurConfig(
        model=load_cascade(_cfg(cfg, None, "cascade",
                                str(default_eye_cascade_path()))),
        policy=_policy_from_config(cfg, fallback),
        detect_params=_detect_params_from_config(cfg))
    thresholds = load_thresholds(_cfg(cfg, None, "skin_thresholds",
                                      str(default_thresholds_path())))
    out = Path(out_dir)
    try:
        result, report = pl.run_recipe(m, recipe_name, plan, blur_config,
                                       thresholds, root, out,
                                       workers=workers)
    except ValueError as e:
        raise ConfigError(str(e))
    mf.save_manifest(result, out / "manifest.csv")
    _write_summary(out, f"augment recipe {recipe_name}", seed,
                   {manifest_path: None},
                   {"input": len(m), "output": len(result),
                    **report.to_dict()}, started)
    click.echo(f"recipe {recipe_name}: {len(m)} -> {len(result)} entries")
    if report.failed:
        sys.exit(1)


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

@main.command("eval")
@click.option("--truth", "truth_path", type=str, required=True,
              help="truth manifest CSV")
@click.option("--preds", "preds_path", type=str, required=True,
              help="predictions CSV (img,pred[,p0..p9])")
@click.option("--out-dir", type=str, default=None,
              help="write report.json / report.txt / confusion.csv there")
@click.option("--heatmap", is_flag=True,
              help="also render row- and column-normalized heatmap PNGs")
@click.pass_context
def eval_cmd(ctx, truth_path, preds_path, out_dir, heatmap):
    """Score predictions against ground truth."""
    started = time.monotonic()
    truth = _load_manifest_or_die(truth_path)
    try:
        preds = ev.load_predictions(_require_file(preds_path, "predictions"))
        report = ev.evaluate(truth, preds)
    except ev.EvaluationError as e:
        raise ConfigError(str(e))
    click.echo(ev.render_text_report(report), nl=False)
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(report.to_json() + "\n",
                                         encoding="utf-8")
        (out / "report.txt").write_text(ev.render_text_report(report),
                                        encoding="utf-8")
        (out / "confusion.csv").write_text(
            ev.confusion_to_csv(report.confusion), encoding="utf-8")
        if heatmap:
            ev.confusion_heatmap_png(report.row_normalized,
                                     out / "confusion_by_true_row.png")
            ev.confusion_heatmap_png(
                report.column_normalized,
                out / "confusion_by_predicted_column.png")
        _write_summary(out, "eval", None,
                       {truth_path: None, preds_path: None},
                       {"scored": report.n_scored,
                        "accuracy": report.accuracy}, started)


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------

@main.command()
@click.option("--images-root", type=str, required=True)
@click.option("--manifest", "manifest_path", type=str, required=True)
@click.option("--presets", "preset_dir", type=str, required=True,
              help="directory for threshold preset JSON files")
@click.option("--static", "static_dir", type=str, default=None,
              help="built UI bundle directory to serve at /")
@click.option("--host", type=str, default="127.0.0.1")
@click.option("--port", type=int, default=8077)
@click.pass_context
def serve(ctx, images_root, manifest_path, preset_dir, static_dir, host,
          port):
    """Run the interactive skin-threshold calibration server."""
    import uvicorn

    from .server import create_app
    app = create_app(images_root=Path(images_root),
                     manifest_path=_require_file(manifest_path, "manifest"),
                     preset_dir=Path(preset_dir),
                     static_dir=Path(static_dir) if static_dir else None)
    uvicorn.run(app, host=host, port=port, log_level="info")


if __name__ == "__main__":
    main()
