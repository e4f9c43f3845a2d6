"""
Use case: Curate Dataset
Pair rendered target views with their reference views and store them.
"""

import logging
from typing import Optional

from ...config import AppConfig
from ...domain.entities import CurationResult, SceneManifest
from ...infrastructure.repositories.artifact_repository import find_view_image
from ...infrastructure.repositories.dataset_repository import DatasetRepository
from ..services.curation_service import CurationService
from ..services.view_selection_service import ViewSelectionService

logger = logging.getLogger(__name__)


class CurateDatasetUseCase:

    def __init__(self, config: AppConfig, repository: Optional[DatasetRepository] = None):
        self.config = config
        self.curator = CurationService(ViewSelectionService(config.selection), config.curation)
        self.repository = repository

    def execute(self, manifest: SceneManifest, renders_dir: str) -> CurationResult:
        rendered = {i: find_view_image(renders_dir, i) for i in manifest.target_indices}
        result = self.curator.curate_pairs(manifest, rendered)
        if self.repository is not None:
            result.pairs = self.repository.save(result)
        logger.info("Scene %s: %d pairs (%d targets available%s)", result.scene_id,
                    len(result.pairs), result.available_targets,
                    ", below range" if result.below_range else "")
        return result
