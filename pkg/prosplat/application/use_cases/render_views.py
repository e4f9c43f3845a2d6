"""
Use case: Render Views
Splat a primitive set into every target view of a scene.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ...config import AppConfig
from ...domain.entities import FrameBuffer, SceneManifest
from ...domain.value_objects import GaussianPrimitive
from ...infrastructure.repositories.artifact_repository import ArtifactRepository, view_image_stem
from ..services.splat_renderer import SplatRenderer

logger = logging.getLogger(__name__)


@dataclass
class RenderReport:
    scene_id: str
    primitives: int
    frames: Dict[int, FrameBuffer] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "primitives": self.primitives,
            "views": [
                {
                    "index": index,
                    "file": view_image_stem(index),
                    "coverage": float(np.mean(frame.accumulated_alpha)),
                }
                for index, frame in sorted(self.frames.items())
            ],
        }


class RenderViewsUseCase:
    """Render the target views (or an explicit index list) of a scene."""

    def __init__(self, config: AppConfig, repository: Optional[ArtifactRepository] = None):
        self.config = config
        self.renderer = SplatRenderer(config.render, config.threads)
        self.repository = repository

    def execute(
        self,
        manifest: SceneManifest,
        prims: Sequence[GaussianPrimitive],
        indices: Optional[List[int]] = None,
    ) -> RenderReport:
        indices = list(manifest.target_indices) if indices is None else indices
        report = RenderReport(scene_id=manifest.scene_id, primitives=len(prims))
        for index in indices:
            frame = self.renderer.render_view(prims, manifest.views[index].camera)
            report.frames[index] = frame
            if self.repository is not None:
                self.repository.save_image(view_image_stem(index), frame.rgb,
                                           self.config.image_format)
        if self.repository is not None:
            self.repository.save_json("render.json", report.summary())
        logger.info("Rendered %d views of scene %s from %d primitives",
                    len(indices), manifest.scene_id, len(prims))
        return report
