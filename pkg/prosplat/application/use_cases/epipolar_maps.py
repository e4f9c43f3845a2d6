"""
Use case: Epipolar Maps
Distance maps between each target view and its selected reference, at
latent-grid resolution.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from ...config import AppConfig
from ...domain.entities import EpipolarDistanceMap, SceneManifest
from ...infrastructure.repositories.artifact_repository import ArtifactRepository
from ..services.geometry_service import GeometryService
from ..services.resampling import pooled_grid
from .select_reference import SelectReferenceUseCase

logger = logging.getLogger(__name__)


def latent_grid(manifest: SceneManifest, latent_scale: int) -> Tuple[int, int]:
    return pooled_grid(manifest.image_width, manifest.image_height, latent_scale)


@dataclass
class EpipolarReport:
    scene_id: str
    grid: Tuple[int, int]
    maps: Dict[int, Tuple[int, EpipolarDistanceMap]] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "grid": list(self.grid),
            "maps": [
                {
                    "target_index": target,
                    "reference_index": ref,
                    "file": f"epimap_{target:03d}_{ref:03d}",
                    "degenerate_rows": int(dmap.degenerate_rows.sum()),
                    "sentinel": dmap.sentinel,
                    "max_distance": float(dmap.distances.max()),
                }
                for target, (ref, dmap) in sorted(self.maps.items())
            ],
        }


class EpipolarMapsUseCase:

    def __init__(self, config: AppConfig, repository: Optional[ArtifactRepository] = None):
        self.config = config
        self.geometry = GeometryService(config.geometry.fmatrix_form,
                                        config.geometry.sentinel, config.threads)
        self.selection = SelectReferenceUseCase(config)
        self.repository = repository

    def distance_map(self, manifest: SceneManifest, target: int, ref: int,
                     grid: Tuple[int, int]) -> EpipolarDistanceMap:
        return self.geometry.epipolar_distance_map(
            manifest.views[target].camera, manifest.views[ref].camera,
            grid, grid, strict=self.config.geometry.strict,
        )

    def execute(self, manifest: SceneManifest) -> EpipolarReport:
        grid = latent_grid(manifest, self.config.attention.latent_scale)
        report = EpipolarReport(scene_id=manifest.scene_id, grid=grid)
        for target in manifest.target_indices:
            ref, _ = self.selection.reference_for(manifest, target)
            dmap = self.distance_map(manifest, target, ref, grid)
            report.maps[target] = (ref, dmap)
            if self.repository is not None:
                stem = f"epimap_{target:03d}_{ref:03d}"
                self.repository.save_gray(stem, dmap.distances)
                center = (grid[0] // 2) * grid[1] + grid[1] // 2
                self.repository.save_gray(f"{stem}_center", dmap.row_image(center))
                self.repository.save_array(stem, dmap.distances)

        if self.repository is not None:
            self.repository.save_json("epimap.json", report.summary())
        logger.info("Computed %d epipolar distance maps on a %dx%d grid",
                    len(report.maps), grid[0], grid[1])
        return report
