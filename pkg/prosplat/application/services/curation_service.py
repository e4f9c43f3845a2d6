"""
Training-pair curation.

From a scene's target views, pick up to ``max_targets`` uniformly spaced
ones (flagged below range when fewer than ``min_targets`` exist) and pair
each with its maximum-overlap input view.
"""

import logging
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from ...config import CurationSettings
from ...domain.entities import CuratedPair, CurationResult, SceneManifest
from ...domain.exceptions import MissingFile, NoTargets
from .view_selection_service import ViewSelectionService

logger = logging.getLogger(__name__)


class CurationService:
    """Evenly spaced target picking and reference pairing for training data."""

    def __init__(
        self,
        selector: Optional[ViewSelectionService] = None,
        settings: Optional[CurationSettings] = None,
    ):
        self.selector = selector or ViewSelectionService()
        self.settings = settings or CurationSettings()

    def select_targets(self, target_indices: Sequence[int]) -> Tuple[List[int], bool]:
        """(chosen scene indices, below_range)."""
        available = len(target_indices)
        if available == 0:
            raise NoTargets("scene has no target views")
        count = min(self.settings.max_targets, available)
        positions = np.round(np.linspace(0, available - 1, count)).astype(int)
        chosen = [int(target_indices[p]) for p in positions]
        return chosen, available < self.settings.min_targets

    def curate_pairs(
        self,
        manifest: SceneManifest,
        rendered: Mapping[int, Path],
    ) -> CurationResult:
        """Pairs for the selected targets; ``rendered`` maps target index -> rendered image."""
        chosen, below_range = self.select_targets(manifest.target_indices)
        missing = [str(rendered.get(i, f"<render of view {i}>")) for i in chosen
                   if i not in rendered or not Path(rendered[i]).is_file()]
        if missing:
            raise MissingFile(missing, "rendered target views are missing")
        if below_range:
            logger.warning("Scene %s has only %d target views (expected %d to %d)",
                           manifest.scene_id, len(manifest.target_indices),
                           self.settings.min_targets, self.settings.max_targets)

        inputs = manifest.input_views
        pairs: List[CuratedPair] = []
        for target in chosen:
            tgt_view = manifest.views[target]
            position, score = self.selector.select_reference(tgt_view.camera, inputs)
            ref_index = manifest.input_indices[position]
            ref_view = manifest.views[ref_index]
            pairs.append(CuratedPair(
                target_index=target,
                reference_index=ref_index,
                score=score,
                rendered_path=Path(rendered[target]),
                ground_truth_path=tgt_view.image_path,
                reference_path=ref_view.image_path,
                target_pose=tgt_view.pose,
                reference_pose=ref_view.pose,
            ))

        logger.info("Curated %d pairs from scene %s", len(pairs), manifest.scene_id)
        return CurationResult(
            scene_id=manifest.scene_id,
            pairs=pairs,
            available_targets=len(manifest.target_indices),
            below_range=below_range,
        )
