"""
Use case: Select Reference
Score every input view against every target view and pick the winners.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ...config import AppConfig
from ...domain.entities import OverlapScore, SceneManifest
from ...infrastructure.repositories.artifact_repository import ArtifactRepository
from ..services.view_selection_service import ViewSelectionService

logger = logging.getLogger(__name__)

TABLE_HEADER = ("target_index", "view_index", "dist", "angle", "score", "selected")


@dataclass
class SelectionReport:
    scene_id: str
    # target scene index -> (winning scene index, all candidate scores)
    selections: Dict[int, Tuple[int, List[OverlapScore]]] = field(default_factory=dict)

    def rows(self, input_indices) -> List[tuple]:
        rows = []
        for target, (winner, scores) in sorted(self.selections.items()):
            for score in scores:
                view = input_indices[score.view_index]
                rows.append((target, view, score.dist, score.angle, score.score,
                             int(view == winner)))
        return rows


class SelectReferenceUseCase:

    def __init__(self, config: AppConfig, repository: Optional[ArtifactRepository] = None):
        self.config = config
        self.selector = ViewSelectionService(config.selection)
        self.repository = repository

    def reference_for(self, manifest: SceneManifest, target: int) -> Tuple[int, OverlapScore]:
        """(scene index, score) of the reference view chosen for ``target``."""
        position, score = self.selector.select_reference(
            manifest.views[target].camera, manifest.input_views
        )
        return manifest.input_indices[position], score

    def execute(self, manifest: SceneManifest) -> SelectionReport:
        report = SelectionReport(scene_id=manifest.scene_id)
        inputs = manifest.input_views
        for target in manifest.target_indices:
            scores = self.selector.score_all(manifest.views[target].camera, inputs)
            position, _ = self.selector.select_reference(manifest.views[target].camera, inputs)
            report.selections[target] = (manifest.input_indices[position], scores)

        if self.repository is not None:
            self.repository.save_tsv("select_ref.tsv", TABLE_HEADER,
                                     report.rows(manifest.input_indices))
        logger.info("Selected references for %d target views", len(report.selections))
        return report
