"""
Use case: Fuse Views
For every target view: encode the rendered target and its reference into
latents, fuse them with epipolar-weighted attention, build the x2 / x4
injection features, run the denoising backend and decode the enhanced
latent back to an image.
The fusion mode can drop the epipolar modulation, or the reference view
altogether, to compare variants.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional

import numpy as np

from ...config import AppConfig
from ...domain.entities import FeatureGrid, ProjectionWeights, SceneManifest
from ...domain.enums import FusionMode
from ...domain.exceptions import MissingFile
from ...infrastructure.data_providers.image_provider import read_image
from ...infrastructure.data_providers.weights_provider import load_weights, save_weights
from ...infrastructure.repositories.artifact_repository import (
    ArtifactRepository,
    find_view_image,
    fused_image_stem,
)
from ..services.attention_service import AttentionService
from ..services.denoising_backend import get_backend
from ..services.latent_codec import LatentCodec
from .epipolar_maps import EpipolarMapsUseCase, latent_grid

logger = logging.getLogger(__name__)


@dataclass
class FusedView:
    target_index: int
    reference_index: Optional[int]
    enhanced: FeatureGrid
    image: np.ndarray
    mean_gate: Optional[float]


@dataclass
class FusionReport:
    scene_id: str
    backend: str
    fusion: FusionMode = FusionMode.EPIPOLAR
    views: Dict[int, FusedView] = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "scene_id": self.scene_id,
            "backend": self.backend,
            "fusion": self.fusion.value,
            "views": [
                {
                    "target_index": index,
                    "reference_index": fused.reference_index,
                    "latent_grid": [fused.enhanced.h, fused.enhanced.w, fused.enhanced.c],
                    "mean_gate": fused.mean_gate,
                    "file": fused_image_stem(index),
                }
                for index, fused in sorted(self.views.items())
            ],
        }


class FuseViewsUseCase:

    def __init__(self, config: AppConfig, repository: Optional[ArtifactRepository] = None):
        self.config = config
        att = config.attention
        self.attention = AttentionService(att.to_attention_config(), config.threads)
        self.codec = LatentCodec(att.channels, att.latent_scale, config.seed)
        self.backend = get_backend(att.backend)
        self.epipolar = EpipolarMapsUseCase(config)
        self.repository = repository

    def load_weights(self) -> ProjectionWeights:
        att = self.config.attention
        if att.weights_path:
            return load_weights(att.weights_path)
        # dk = c so the attention output adds back onto the target latent.
        return ProjectionWeights.random(att.channels, att.dk or att.channels, self.config.seed)

    def execute(self, manifest: SceneManifest, renders_dir: Optional[str] = None) -> FusionReport:
        weights = self.load_weights()
        grid = latent_grid(manifest, self.config.attention.latent_scale)
        fusion = self.config.attention.fusion
        report = FusionReport(scene_id=manifest.scene_id, backend=self.backend.name, fusion=fusion)

        for target in manifest.target_indices:
            source = (find_view_image(renders_dir, target) if renders_dir
                      else manifest.views[target].image_path)
            if not Path(source).is_file():
                raise MissingFile([source], "rendered target view is missing")
            tgt_latent = self.codec.encode(read_image(source))
            if fusion is FusionMode.NONE:
                ref, mean_gate = None, None
                enhanced = self.backend.enhance(tgt_latent, [], self.config.attention.timestep)
            else:
                ref, _ = self.epipolar.selection.reference_for(manifest, target)
                ref_latent = self.codec.encode(read_image(manifest.views[ref].image_path))
                dmap = self.epipolar.distance_map(manifest, target, ref, grid)
                maps = self.attention.attention_maps(tgt_latent, ref_latent, dmap, weights)
                fused = self.attention.fuse(tgt_latent, ref_latent, dmap, weights, maps)
                x2, x4 = self.attention.fuse_and_inject(fused, weights)
                enhanced = self.backend.enhance(tgt_latent, [x2, x4],
                                                self.config.attention.timestep)
                mean_gate = float(np.mean(maps.gate))
            image = self.codec.decode(enhanced, manifest.image_height, manifest.image_width)

            report.views[target] = FusedView(
                target_index=target,
                reference_index=ref,
                enhanced=enhanced,
                image=image,
                mean_gate=mean_gate,
            )
            if self.repository is not None:
                self.repository.save_image(fused_image_stem(target), image,
                                           self.config.image_format)
            logger.debug("Fused target %d with reference %s", target, ref)

        if self.repository is not None:
            save_weights(self.repository.path("weights"), weights)
            self.repository.save_json("fuse.json", report.summary())
        logger.info("Fused %d target views with backend '%s' (%s fusion)",
                    len(report.views), self.backend.name, fusion.value)
        return report
