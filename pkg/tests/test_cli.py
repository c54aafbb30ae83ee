import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from driveraug.cli import main
from driveraug.manifest import load_manifest

from conftest import make_synthetic_corpus


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_corpus")
    manifest_path = make_synthetic_corpus(root, n_samples=18, n_subjects=6,
                                          size=24)
    return root, manifest_path


def run_cli(*args):
    return CliRunner().invoke(main, [str(a) for a in args],
                              catch_exceptions=False)


class TestStats:
    def test_table_has_ten_rows(self, corpus):
        _, manifest_path = corpus
        res = run_cli("stats", manifest_path)
        assert res.exit_code == 0
        class_rows = [l for l in res.output.splitlines()
                      if l.startswith("c")]
        assert len(class_rows) == 11  # header "class ..." + c0..c9

    def test_json_out(self, corpus, tmp_path):
        _, manifest_path = corpus
        out = tmp_path / "stats.json"
        res = run_cli("stats", manifest_path, "--json-out", out)
        assert res.exit_code == 0
        payload = json.loads(out.read_text())
        assert sum(payload["counts"]) == payload["samples"]

    def test_bad_manifest_exit_2(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("nope\n")
        res = run_cli("stats", bad)
        assert res.exit_code == 2

    def test_missing_file_exit_2(self):
        res = run_cli("stats", "/nonexistent.csv")
        assert res.exit_code == 2


class TestSplit:
    def test_split_twice_byte_identical(self, corpus, tmp_path):
        _, manifest_path = corpus
        outs = []
        for sub in ("a", "b"):
            out = tmp_path / sub
            res = run_cli("split", manifest_path, "--test-drivers", 2,
                          "--seed", 7, "--out-dir", out)
            assert res.exit_code == 0
            outs.append(((out / "train.csv").read_bytes(),
                         (out / "test.csv").read_bytes()))
        assert outs[0] == outs[1]

    def test_split_writes_summary(self, corpus, tmp_path):
        _, manifest_path = corpus
        out = tmp_path / "s"
        run_cli("split", manifest_path, "--test-drivers", 2, "--seed", 1,
                "--out-dir", out)
        summary = json.loads((out / "run_summary.json").read_text())
        assert summary["seed"] == 1
        assert summary["command"] == "split"
        assert summary["counts"]["train"] + summary["counts"]["test"] == 18
        assert list(summary["inputs"].values())[0]  # input hash recorded

    def test_too_many_drivers_exit_2(self, corpus, tmp_path):
        _, manifest_path = corpus
        res = run_cli("split", manifest_path, "--test-drivers", 99,
                      "--out-dir", tmp_path)
        assert res.exit_code == 2


class TestAugment:
    def test_classical(self, corpus, tmp_path):
        root, manifest_path = corpus
        out = tmp_path / "aug"
        res = run_cli("augment", "classical", manifest_path,
                      "--images-root", root, "--out", out, "--seed", 3)
        assert res.exit_code == 0
        m = load_manifest(out / "manifest.csv")
        assert len(m) == 54
        assert (out / "run_summary.json").is_file()

    def test_skinseg(self, corpus, tmp_path):
        root, manifest_path = corpus
        out = tmp_path / "seg"
        res = run_cli("augment", "skinseg", manifest_path,
                      "--images-root", root, "--out", out)
        assert res.exit_code == 0
        m = load_manifest(out / "manifest.csv")
        assert len(m) == 18
        assert all(s.provenance == "skinseg" for s in m)

    def test_blur_with_fixed_region(self, corpus, tmp_path):
        root, manifest_path = corpus
        out = tmp_path / "blur"
        res = run_cli("augment", "blur", manifest_path,
                      "--images-root", root, "--out", out,
                      "--fallback", "fixed_region")
        assert res.exit_code == 0
        m = load_manifest(out / "manifest.csv")
        assert len(m) == 18

    def test_ensemble_row_count(self, corpus, tmp_path):
        root, manifest_path = corpus
        seg = tmp_path / "seg"
        run_cli("augment", "skinseg", manifest_path, "--images-root", root,
                "--out", seg)
        out_csv = tmp_path / "combined" / "manifest.csv"
        res = run_cli("ensemble", manifest_path, seg / "manifest.csv",
                      "--out", out_csv, "--seed", 1)
        assert res.exit_code == 0
        assert len(load_manifest(out_csv)) == 36

    def test_recipe_paper_full(self, corpus, tmp_path):
        root, manifest_path = corpus
        out = tmp_path / "recipe"
        res = run_cli("augment", "recipe", manifest_path,
                      "--images-root", root, "--out", out,
                      "--recipe", "paper-full", "--fallback", "fixed_region")
        assert res.exit_code == 0
        assert len(load_manifest(out / "manifest.csv")) == 72

    def test_missing_source_exit_1(self, corpus, tmp_path):
        root, manifest_path = corpus
        broken = tmp_path / "broken.csv"
        text = Path(manifest_path).read_text()
        broken.write_text(text + "p888,c1,missing.jpg\n")
        res = run_cli("augment", "skinseg", broken, "--images-root", root,
                      "--out", tmp_path / "out")
        assert res.exit_code == 1

    def test_config_file_flag_override(self, corpus, tmp_path):
        root, manifest_path = corpus
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"seed": 5, "images_root": str(root)}))
        out = tmp_path / "cfgout"
        res = run_cli("--config", cfg, "augment", "classical", manifest_path,
                      "--out", out, "--seed", 9)
        assert res.exit_code == 0
        summary = json.loads((out / "run_summary.json").read_text())
        assert summary["seed"] == 9  # flag beats config

    def test_plan_file_controls_transforms(self, corpus, tmp_path):
        root, manifest_path = corpus
        plan = tmp_path / "plan.json"
        plan.write_text(json.dumps({"enable_jitter": False,
                                    "rotation_range": 10.0}))
        out = tmp_path / "planout"
        res = run_cli("augment", "classical", manifest_path,
                      "--images-root", root, "--out", out, "--plan", plan)
        assert res.exit_code == 0
        m = load_manifest(out / "manifest.csv")
        assert len(m) == 36  # originals + rotated only
        assert "jittered" not in m.counts_by_provenance()

    def test_recipe_incompatible_plan_exit_2(self, corpus, tmp_path):
        root, manifest_path = corpus
        plan = tmp_path / "nojitter.json"
        plan.write_text(json.dumps({"enable_jitter": False}))
        res = run_cli("augment", "recipe", manifest_path,
                      "--images-root", root, "--out", tmp_path / "r",
                      "--recipe", "paper-full", "--plan", plan)
        assert res.exit_code == 2

    def test_classical_resume_flag(self, corpus, tmp_path):
        root, manifest_path = corpus
        out = tmp_path / "resout"
        assert run_cli("augment", "classical", manifest_path,
                       "--images-root", root, "--out", out,
                       "--seed", 3).exit_code == 0
        first = (out / "manifest.csv").read_bytes()
        res = run_cli("augment", "classical", manifest_path,
                      "--images-root", root, "--out", out, "--seed", 3,
                      "--resume")
        assert res.exit_code == 0
        assert (out / "manifest.csv").read_bytes() == first


class TestEval:
    def make_preds(self, manifest_path, tmp_path, perfect=True):
        m = load_manifest(manifest_path)
        lines = ["img,pred"]
        for s in m.samples:
            lines.append(f"{s.filename},{s.label if perfect else 0}")
        p = tmp_path / "preds.csv"
        p.write_text("\n".join(lines) + "\n")
        return p

    def test_perfect_predictions_accuracy_one(self, corpus, tmp_path):
        _, manifest_path = corpus
        preds = self.make_preds(manifest_path, tmp_path)
        out = tmp_path / "eval"
        res = run_cli("eval", "--truth", manifest_path, "--preds", preds,
                      "--out-dir", out, "--heatmap")
        assert res.exit_code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["accuracy"] == 1.0
        assert (out / "confusion.csv").is_file()
        assert (out / "confusion_by_true_row.png").is_file()

    def test_bad_predictions_exit_2(self, corpus, tmp_path):
        _, manifest_path = corpus
        bad = tmp_path / "bad.csv"
        bad.write_text("img,pred\nghost.jpg,0\n")
        res = run_cli("eval", "--truth", manifest_path, "--preds", bad)
        assert res.exit_code == 2


class TestHelp:
    @pytest.mark.parametrize("cmd", [
        [], ["stats"], ["split"], ["augment"], ["augment", "classical"],
        ["augment", "blur"], ["augment", "skinseg"], ["augment", "recipe"],
        ["ensemble"], ["eval"], ["serve"],
    ])
    def test_help_available(self, cmd):
        res = run_cli(*cmd, "--help")
        assert res.exit_code == 0
        assert "Usage" in res.output
