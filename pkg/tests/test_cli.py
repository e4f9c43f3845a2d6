"""End-to-end tests of the prosplat command line on the bundled scene."""

import csv
import hashlib
import json
import shutil

import numpy as np
import pytest

from conftest import BUNDLED_SCENE
from prosplat.domain.enums import FMatrixForm, FusionMode, NormScope
from prosplat.infrastructure.data_providers.image_provider import read_image
from prosplat.main import main, parse_args

SCENE = str(BUNDLED_SCENE)


def run(*argv):
    return main([*argv, "--log-level", "WARNING"])


def last_json_line(text):
    return json.loads(text.strip().splitlines()[-1])


def tree_digest(root):
    """Relative path -> sha256 of every file under ``root``."""
    return {
        str(path.relative_to(root)): hashlib.sha256(path.read_bytes()).hexdigest()
        for path in sorted(root.rglob("*")) if path.is_file()
    }


@pytest.fixture
def renders(tmp_path):
    out = tmp_path / "renders"
    assert run("render", "--scene", SCENE, "--out", str(out)) == 0
    return out


# ╔══════════════════════════════════════════════════════════════╗
# ║  Argument parsing                                            ║
# ╚══════════════════════════════════════════════════════════════╝

class TestParseArgs:

    def test_defaults(self):
        config = parse_args(["epimap", "--scene", SCENE])
        assert config.command == "epimap"
        assert config.sweep.depth_candidates == 32
        assert config.attention.latent_scale == 8
        assert config.render.dilation == 0.3
        assert config.geometry.fmatrix_form is FMatrixForm.CONSISTENT

    def test_flags(self):
        config = parse_args(["fuse", "--scene", SCENE, "--no-dilation", "--literal-fmatrix",
                             "--latent-scale", "4", "--norm-scope", "global", "--no-sigmoid"])
        assert config.render.dilation == 0.0
        assert config.geometry.fmatrix_form is FMatrixForm.LITERAL
        assert config.attention.latent_scale == 4
        assert config.attention.norm_scope is NormScope.GLOBAL
        assert not config.attention.apply_sigmoid
        assert config.attention.fusion is FusionMode.EPIPOLAR

    def test_fusion_flag(self):
        config = parse_args(["fuse", "--scene", SCENE, "--fusion", "plain"])
        assert config.attention.fusion is FusionMode.PLAIN
        assert config.attention.to_attention_config().fusion is FusionMode.PLAIN

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            parse_args(["nope"])


# ╔══════════════════════════════════════════════════════════════╗
# ║  Commands                                                    ║
# ╚══════════════════════════════════════════════════════════════╝

class TestCommands:

    def test_render(self, renders):
        assert (renders / "view_001.png").is_file()
        report = json.loads((renders / "render.json").read_text())
        assert report["primitives"] == 4
        assert [v["index"] for v in report["views"]] == [1]

    def test_render_without_primitives_gives_background(self, tmp_path):
        empty = tmp_path / "empty.json"
        empty.write_text(json.dumps({"primitives": []}))
        out = tmp_path / "bg"
        assert run("render", "--scene", SCENE, "--out", str(out), "--primitives", str(empty),
                   "--background", "0.2", "0.4", "0.6") == 0
        image = read_image(out / "view_001.png")
        assert image.shape == (24, 32, 3)
        np.testing.assert_allclose(image, np.broadcast_to([51, 102, 153], image.shape) / 255.0,
                                   atol=1e-12)
        assert json.loads((out / "render.json").read_text())["primitives"] == 0

    def test_render_ppm(self, tmp_path):
        out = tmp_path / "ppm"
        assert run("render", "--scene", SCENE, "--out", str(out), "--format", "ppm") == 0
        assert (out / "view_001.ppm").read_text().startswith("P3\n32 24\n255\n")

    def test_select_ref_picks_nearest_input(self, tmp_path):
        out = tmp_path / "sel"
        assert run("select-ref", "--scene", SCENE, "--out", str(out),
                   "--save-chart", str(out / "scores.png")) == 0
        with open(out / "select_ref.tsv", newline="") as f:
            rows = list(csv.DictReader(f, delimiter="\t"))
        assert [r["view_index"] for r in rows] == ["0", "2"]
        selected = [r for r in rows if r["selected"] == "1"]
        assert len(selected) == 1 and selected[0]["view_index"] == "2"
        assert float(selected[0]["score"]) == pytest.approx(3.5)
        assert (out / "scores.png").is_file()

    def test_epimap(self, tmp_path):
        out = tmp_path / "epi"
        assert run("epimap", "--scene", SCENE, "--out", str(out)) == 0
        report = json.loads((out / "epimap.json").read_text())
        assert report["grid"] == [3, 4]
        entry = report["maps"][0]
        assert (entry["target_index"], entry["reference_index"]) == (1, 2)
        assert (out / "epimap_001_002.png").is_file()
        assert (out / "epimap_001_002.npy").is_file()

    def test_costvol(self, tmp_path):
        out = tmp_path / "cost"
        assert run("costvol", "--scene", SCENE, "--out", str(out), "--depth-candidates", "8") == 0
        report = json.loads((out / "costvol.json").read_text())
        assert [v["reference_index"] for v in report["volumes"]] == [0, 2]
        assert report["volumes"][0]["grid"] == [6, 8]
        assert len(report["volumes"][0]["depths"]) == 8
        assert (out / "costvol_000" / "slice_007.png").is_file()

    def test_fuse(self, tmp_path, renders):
        out = tmp_path / "fuse"
        assert run("fuse", "--scene", SCENE, "--out", str(out), "--renders", str(renders)) == 0
        report = json.loads((out / "fuse.json").read_text())
        assert report["backend"] == "identity"
        assert report["views"][0]["reference_index"] == 2
        assert report["views"][0]["latent_grid"] == [3, 4, 8]
        assert (out / "fused_001.png").is_file()

    def test_fusion_variants(self, tmp_path, renders):
        gates = {}
        for mode in ("epipolar", "plain", "none"):
            out = tmp_path / f"fuse_{mode}"
            assert run("fuse", "--scene", SCENE, "--out", str(out), "--renders", str(renders),
                       "--fusion", mode) == 0
            report = json.loads((out / "fuse.json").read_text())
            assert report["fusion"] == mode
            gates[mode] = report["views"][0]["mean_gate"]
            assert report["views"][0]["reference_index"] == (None if mode == "none" else 2)
        assert gates["none"] is None
        # Unweighted gate inputs are never smaller than distance-weighted ones.
        assert gates["plain"] > gates["epipolar"]

    def test_eval_scores_fused_views(self, tmp_path, renders):
        fused = tmp_path / "fuse"
        assert run("fuse", "--scene", SCENE, "--out", str(fused), "--renders", str(renders),
                   "--fusion", "none") == 0
        out = tmp_path / "eval"
        assert run("eval", "--scene", SCENE, "--out", str(out), "--renders", str(fused)) == 0
        report = json.loads((out / "metrics.json").read_text())
        assert report["views"][0]["name"] == "view_001"
        assert report["loss"]["views"] == 1

    def test_eval(self, tmp_path, renders):
        out = tmp_path / "eval"
        assert run("eval", "--scene", SCENE, "--out", str(out), "--renders", str(renders)) == 0
        report = json.loads((out / "metrics.json").read_text())
        assert report["views"][0]["name"] == "view_001"
        assert report["loss"]["views"] == 1
        assert report["loss"]["perceptual_placeholder"] is True

    def test_eval_identical_pair_is_infinite(self, tmp_path):
        image = str(BUNDLED_SCENE / "images" / "000.ppm")
        out = tmp_path / "pair"
        assert run("eval", "--pred", image, "--gt", image, "--out", str(out)) == 0
        text = (out / "metrics.json").read_text()
        assert "Infinity" in text
        report = json.loads(text)
        assert report["psnr_infinite"] == 1
        assert report["views"][0]["ssim"] == pytest.approx(1.0, abs=1e-9)

    def test_curate(self, tmp_path, renders):
        out = tmp_path / "dataset"
        assert run("curate", "--scene", SCENE, "--out", str(out), "--renders", str(renders)) == 0
        summary = json.loads((out / "bundled" / "pairs.json").read_text())
        assert summary["below_range"] is True
        assert summary["pairs"][0]["reference_index"] == 2
        assert (out / "bundled" / "001" / "rendered.png").is_file()

    def test_synth_then_select(self, tmp_path):
        scene = tmp_path / "arc"
        assert run("synth", "--out", str(scene), "--views", "5", "--inputs", "2",
                   "--num-primitives", "6", "--width", "24", "--height", "16") == 0
        assert (scene / "manifest.json").is_file()
        assert run("select-ref", "--scene", str(scene), "--out", str(tmp_path / "sel")) == 0


# ╔══════════════════════════════════════════════════════════════╗
# ║  Determinism and errors                                      ║
# ╚══════════════════════════════════════════════════════════════╝

class TestDeterminismAndErrors:

    def test_pipeline_reruns_are_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            root = tmp_path / name
            renders = str(root / "render")
            assert run("render", "--scene", SCENE, "--out", renders) == 0
            assert run("select-ref", "--scene", SCENE, "--out", str(root / "select")) == 0
            assert run("epimap", "--scene", SCENE, "--out", str(root / "epimap")) == 0
            assert run("costvol", "--scene", SCENE, "--out", str(root / "costvol"),
                       "--depth-candidates", "8") == 0
            assert run("fuse", "--scene", SCENE, "--out", str(root / "fuse"),
                       "--renders", renders) == 0
            assert run("eval", "--scene", SCENE, "--out", str(root / "eval"),
                       "--renders", renders) == 0
        first, second = tree_digest(tmp_path / "a"), tree_digest(tmp_path / "b")
        for expected in ("render/view_001.png", "select/select_ref.tsv", "epimap/epimap.json",
                         "costvol/costvol.json", "fuse/fused_001.png", "fuse/fuse.json",
                         "eval/metrics.json"):
            assert expected in first
        assert first == second

    def test_feature_scale_must_tile_image(self, tmp_path, capsys):
        assert run("costvol", "--scene", SCENE, "--out", str(tmp_path),
                   "--feature-scale", "5") == 2
        error = last_json_line(capsys.readouterr().err)
        assert error["error"] == "ShapeMismatch"
        assert error["details"]["factor"] == 5

    def test_missing_scene_flag(self, tmp_path, capsys):
        assert run("epimap", "--out", str(tmp_path)) == 2
        error = last_json_line(capsys.readouterr().err)
        assert error["error"] == "InvalidConfig"
        assert error["details"]["flag"] == "--scene"

    def test_missing_scene_file(self, tmp_path, capsys):
        assert run("select-ref", "--scene", str(tmp_path / "none"), "--out", str(tmp_path)) == 2
        error = last_json_line(capsys.readouterr().err)
        assert error["error"] == "MissingFile"

    def test_missing_renders(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run("curate", "--scene", SCENE, "--out", str(tmp_path / "d"),
                   "--renders", str(empty)) == 2
        assert last_json_line(capsys.readouterr().err)["error"] == "MissingFile"

    def test_strict_epipolar_on_forward_motion(self, tmp_path, capsys):
        scene = tmp_path / "scene"
        scene.mkdir()
        for name in ("images", "primitives.json", "manifest.json"):
            src = BUNDLED_SCENE / name
            if src.is_dir():
                shutil.copytree(src, scene / name)
            else:
                (scene / name).write_bytes(src.read_bytes())
        # Reference view 2 moved straight ahead of the target, principal points on a grid cell
        # center: the epipole falls exactly on a cell.
        lines = (BUNDLED_SCENE / "poses.txt").read_text().splitlines()
        for row in (2, 3):
            fields = lines[row].split()
            fields[3] = "0.375"
            if row == 3:
                fields[10], fields[18] = "0.0", "-0.5"
            lines[row] = " ".join(fields)
        (scene / "poses.txt").write_text("\n".join(lines) + "\n")
        assert run("epimap", "--scene", str(scene), "--out", str(tmp_path / "o"),
                   "--strict-epipolar") == 2
        assert last_json_line(capsys.readouterr().err)["error"] == "DegenerateLine"
