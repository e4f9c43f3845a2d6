"""Unit tests for training-pair curation and the dataset repository."""

import json
import logging
import shutil

import numpy as np
import pytest

from prosplat.application.services.curation_service import CurationService
from prosplat.application.services.view_selection_service import ViewSelectionService
from prosplat.application.use_cases.curate_dataset import CurateDatasetUseCase
from prosplat.application.use_cases.generate_scene import GenerateSceneUseCase
from prosplat.config import AppConfig
from prosplat.domain.exceptions import MissingFile, NoTargets
from prosplat.infrastructure.data_providers.manifest_provider import load_scene_manifest
from prosplat.infrastructure.repositories.artifact_repository import view_image_stem
from prosplat.infrastructure.repositories.dataset_repository import DatasetRepository


@pytest.fixture
def scene(tmp_path):
    """Ten-view synthetic scene with three inputs and seven targets."""
    config = AppConfig(synth_views=10, synth_inputs=3, synth_primitives=6,
                       synth_width=24, synth_height=16, seed=5)
    GenerateSceneUseCase(config).execute(str(tmp_path / "scene"), "arc")
    return load_scene_manifest(tmp_path / "scene")


@pytest.fixture
def renders(scene, tmp_path):
    """Stand-in renders: copies of the target ground truth named like render output."""
    out = tmp_path / "renders"
    out.mkdir()
    for i in scene.target_indices:
        shutil.copyfile(scene.views[i].image_path, out / f"{view_image_stem(i)}.png")
    return out


# ╔══════════════════════════════════════════════════════════════╗
# ║  Target selection                                            ║
# ╚══════════════════════════════════════════════════════════════╝

class TestSelectTargets:

    def test_many_targets_are_evenly_spaced(self):
        chosen, below = CurationService().select_targets(list(range(56)))
        assert len(chosen) == 7
        assert chosen[0] == 0 and chosen[-1] == 55
        assert set(np.diff(chosen)) <= {9, 10}
        assert not below

    def test_few_targets_all_kept(self):
        chosen, below = CurationService().select_targets([4, 8, 9])
        assert chosen == [4, 8, 9]
        assert below

    def test_lower_bound_not_flagged(self):
        chosen, below = CurationService().select_targets([1, 2, 3, 4, 5])
        assert chosen == [1, 2, 3, 4, 5]
        assert not below

    def test_exactly_seven(self):
        targets = [3, 5, 6, 7, 11, 12, 20]
        assert CurationService().select_targets(targets) == (targets, False)

    def test_no_targets(self):
        with pytest.raises(NoTargets):
            CurationService().select_targets([])


# ╔══════════════════════════════════════════════════════════════╗
# ║  Pairs                                                       ║
# ╚══════════════════════════════════════════════════════════════╝

class TestCuratePairs:

    def test_references_follow_overlap_selection(self, scene, renders):
        rendered = {i: renders / f"{view_image_stem(i)}.png" for i in scene.target_indices}
        result = CurationService().curate_pairs(scene, rendered)
        selector = ViewSelectionService()
        assert result.available_targets == 7
        assert [p.target_index for p in result.pairs] == list(scene.target_indices)
        for pair in result.pairs:
            position, score = selector.select_reference(scene.views[pair.target_index].camera,
                                                        scene.input_views)
            assert pair.reference_index == scene.input_indices[position]
            assert pair.score == score
            assert pair.reference_index in scene.input_indices
            assert pair.target_pose == scene.views[pair.target_index].pose

    def test_missing_render(self, scene, renders):
        rendered = {i: renders / f"{view_image_stem(i)}.png" for i in scene.target_indices[1:]}
        with pytest.raises(MissingFile):
            CurationService().curate_pairs(scene, rendered)

    def test_bundled_scene_is_below_range(self, bundled_scene, caplog):
        manifest = load_scene_manifest(bundled_scene)
        with caplog.at_level(logging.WARNING):
            result = CurationService().curate_pairs(manifest, {1: manifest.views[1].image_path})
        assert result.below_range
        assert result.pairs[0].reference_index == 2
        assert "target views" in caplog.text


class TestDatasetRepository:

    def test_saves_pairs_and_summary(self, scene, renders, tmp_path):
        dataset = tmp_path / "dataset"
        result = CurateDatasetUseCase(AppConfig(), DatasetRepository(str(dataset))).execute(
            scene, str(renders)
        )
        summary = json.loads((dataset / "arc" / "pairs.json").read_text())
        assert summary["available_targets"] == 7
        assert not summary["below_range"]
        assert len(summary["pairs"]) == len(result.pairs) == 7

        pair = result.pairs[0]
        pair_dir = dataset / "arc" / f"{pair.target_index:03d}"
        assert pair.rendered_path == pair_dir / "rendered.png"
        for name in ("rendered.png", "ground_truth.png", "reference.png", "pair.json"):
            assert (pair_dir / name).is_file()
        assert (pair_dir / "reference.png").read_bytes() == \
            scene.views[pair.reference_index].image_path.read_bytes()
        meta = json.loads((pair_dir / "pair.json").read_text())
        assert meta["reference_index"] == pair.reference_index
        assert len(meta["target_pose"]["extrinsic"]) == 12
