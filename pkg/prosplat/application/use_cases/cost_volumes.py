"""
Use case: Cost Volumes
Plane-sweep each input view against the other inputs and export the
per-depth slices plus an argmax depth map.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ...config import AppConfig
from ...domain.entities import CostVolume, SceneManifest
from ...domain.exceptions import EmptyInputSet
from ...infrastructure.data_providers.image_provider import read_image
from ...infrastructure.repositories.artifact_repository import ArtifactRepository
from ..services.plane_sweep_service import PlaneSweepService
from ..services.resampling import pooled_grid

logger = logging.getLogger(__name__)


@dataclass
class CostVolumeReport:
    scene_id: str
    volumes: Dict[int, CostVolume] = field(default_factory=dict)
    depth_maps: Dict[int, np.ndarray] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "volumes": [
                {
                    "reference_index": index,
                    "grid": [vol.h, vol.w],
                    "depths": vol.depths.tolist(),
                    "valid_fraction": float(np.mean(vol.valid_counts > 0)),
                    "mean_depth": float(np.mean(self.depth_maps[index])),
                }
                for index, vol in sorted(self.volumes.items())
            ],
        }


class CostVolumesUseCase:

    def __init__(self, config: AppConfig, repository: Optional[ArtifactRepository] = None):
        self.config = config
        self.sweeper = PlaneSweepService(config.sweep, config.threads)
        self.repository = repository

    def execute(self, manifest: SceneManifest) -> CostVolumeReport:
        if len(manifest.input_indices) < 2:
            raise EmptyInputSet("plane sweep needs at least two input views")
        scale = self.config.sweep.feature_scale
        pooled_grid(manifest.image_width, manifest.image_height, scale)
        features = {
            i: self.sweeper.image_features(read_image(manifest.views[i].image_path), scale)
            for i in manifest.input_indices
        }

        report = CostVolumeReport(scene_id=manifest.scene_id)
        for ref in manifest.input_indices:
            others = [(features[i], manifest.views[i].camera)
                      for i in manifest.input_indices if i != ref]
            volume = self.sweeper.sweep(features[ref], others, manifest.views[ref].camera)
            depth = self.sweeper.depth_from_cost_volume(volume, self.config.sweep.readout)
            report.volumes[ref] = volume
            report.depth_maps[ref] = depth
            logger.debug("Cost volume for view %d: %d candidates", ref, volume.num_depths)

            if self.repository is not None:
                for m in range(volume.num_depths):
                    self.repository.save_gray(f"costvol_{ref:03d}/slice_{m:03d}", volume.slice(m))
                self.repository.save_gray(f"costvol_{ref:03d}/depth", depth)
                self.repository.save_array(f"costvol_{ref:03d}/values", volume.values)

        if self.repository is not None:
            self.repository.save_json("costvol.json", report.summary())
        logger.info("Built %d cost volumes with %d depth candidates",
                    len(report.volumes), self.config.sweep.depth_candidates)
        return report
