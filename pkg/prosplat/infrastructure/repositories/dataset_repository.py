"""
Dataset repository — stores curated training pairs.

Layout per scene:

    <dataset>/<scene_id>/pairs.json
    <dataset>/<scene_id>/<target:03d>/rendered.<ext>
                                     /ground_truth.<ext>
                                     /reference.<ext>
                                     /pair.json
"""

import shutil
from pathlib import Path
from typing import List

from ...domain.entities import CuratedPair, CurationResult, PoseRecord
from .artifact_repository import dumps_report


def pose_to_dict(pose: PoseRecord) -> dict:
    return {
        "timestamp": pose.timestamp,
        "intrinsics": [pose.fx, pose.fy, pose.cx, pose.cy],
        "extrinsic": list(pose.extrinsic),
    }


def pair_to_dict(pair: CuratedPair) -> dict:
    return {
        "target_index": pair.target_index,
        "reference_index": pair.reference_index,
        "score": {
            "dist": pair.score.dist,
            "raw_dist": pair.score.raw_dist,
            "angle": pair.score.angle,
            "score": pair.score.score,
        },
        "rendered": pair.rendered_path.name,
        "ground_truth": pair.ground_truth_path.name,
        "reference": pair.reference_path.name,
        "target_pose": pose_to_dict(pair.target_pose),
        "reference_pose": pose_to_dict(pair.reference_pose),
    }


class DatasetRepository:
    """Copy curated pairs and their metadata into a dataset directory."""

    def __init__(self, dataset_dir: str):
        self.dataset_dir = Path(dataset_dir)
        self.dataset_dir.mkdir(parents=True, exist_ok=True)

    def save_pair(self, scene_id: str, pair: CuratedPair) -> CuratedPair:
        """Copy the pair's images next to a pair.json; returns the stored pair."""
        pair_dir = self.dataset_dir / scene_id / f"{pair.target_index:03d}"
        pair_dir.mkdir(parents=True, exist_ok=True)

        def copy(src: Path, stem: str) -> Path:
            dst = pair_dir / f"{stem}{src.suffix}"
            shutil.copyfile(src, dst)
            return dst

        stored = CuratedPair(
            target_index=pair.target_index,
            reference_index=pair.reference_index,
            score=pair.score,
            rendered_path=copy(pair.rendered_path, "rendered"),
            ground_truth_path=copy(pair.ground_truth_path, "ground_truth"),
            reference_path=copy(pair.reference_path, "reference"),
            target_pose=pair.target_pose,
            reference_pose=pair.reference_pose,
        )
        (pair_dir / "pair.json").write_text(dumps_report(pair_to_dict(stored)), encoding="utf-8")
        return stored

    def save(self, result: CurationResult) -> List[CuratedPair]:
        (self.dataset_dir / result.scene_id).mkdir(parents=True, exist_ok=True)
        stored = [self.save_pair(result.scene_id, p) for p in result.pairs]
        summary = {
            "scene_id": result.scene_id,
            "available_targets": result.available_targets,
            "below_range": result.below_range,
            "pairs": [pair_to_dict(p) for p in stored],
        }
        (self.dataset_dir / result.scene_id / "pairs.json").write_text(
            dumps_report(summary), encoding="utf-8"
        )
        return stored
