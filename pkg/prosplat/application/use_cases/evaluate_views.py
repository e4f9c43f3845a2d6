"""
Use case: Evaluate Views
PSNR / SSIM / MSE per target view, aggregate means and the joint loss.
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ...config import AppConfig
from ...domain.entities import LossBreakdown, SceneManifest
from ...infrastructure.data_providers.image_provider import read_image, read_mask
from ...infrastructure.repositories.artifact_repository import ArtifactRepository, find_view_image
from ..services.metrics_service import MetricsService

logger = logging.getLogger(__name__)


@dataclass
class ViewMetrics:
    name: str
    psnr: float
    ssim: float
    mse: float


@dataclass
class EvaluationReport:
    views: List[ViewMetrics] = field(default_factory=list)
    loss: Optional[LossBreakdown] = None

    def mean(self) -> dict:
        finite = [v.psnr for v in self.views if math.isfinite(v.psnr)]
        if finite:
            psnr = float(np.mean(finite))
        else:
            psnr = float("inf") if self.views else None
        return {
            "psnr": psnr,
            "ssim": float(np.mean([v.ssim for v in self.views])) if self.views else None,
            "mse": float(np.mean([v.mse for v in self.views])) if self.views else None,
        }

    def summary(self) -> dict:
        data = {
            "views": [
                {"name": v.name, "psnr": v.psnr, "ssim": v.ssim, "mse": v.mse}
                for v in self.views
            ],
            "mean": self.mean(),
            "psnr_infinite": sum(1 for v in self.views if math.isinf(v.psnr)),
        }
        if self.loss is not None:
            data["loss"] = {
                "mse": self.loss.mse,
                "perceptual": self.loss.perceptual,
                "weight": self.loss.weight,
                "total": self.loss.total,
                "views": self.loss.views,
                "perceptual_placeholder": self.loss.perceptual_placeholder,
            }
        return data


class EvaluateViewsUseCase:

    def __init__(self, config: AppConfig, repository: Optional[ArtifactRepository] = None):
        self.config = config
        self.metrics = MetricsService(config.metrics.max_val, config.metrics.perceptual_weight)
        self.repository = repository

    def _mask(self) -> Optional[np.ndarray]:
        path = self.config.metrics.mask_path
        return read_mask(path) if path else None

    def evaluate_pairs(self, pairs: Sequence[Tuple[str, Path, Path]]) -> EvaluationReport:
        """``pairs``: (name, predicted image, ground-truth image)."""
        mask = self._mask()
        report = EvaluationReport()
        images = []
        for name, pred_path, gt_path in pairs:
            pred, gt = read_image(pred_path), read_image(gt_path)
            images.append((pred, gt))
            report.views.append(ViewMetrics(
                name=name,
                psnr=self.metrics.psnr(pred, gt, mask),
                ssim=self.metrics.ssim(pred, gt, mask),
                mse=self.metrics.mse(pred, gt, mask),
            ))
        if images:
            report.loss = self.metrics.joint_loss(images, mask=mask)

        if self.repository is not None:
            self.repository.save_json("metrics.json", report.summary())
        logger.info("Evaluated %d views", len(report.views))
        return report

    def execute(self, manifest: SceneManifest, renders_dir: str) -> EvaluationReport:
        pairs = [
            (f"view_{i:03d}", find_view_image(renders_dir, i), manifest.views[i].image_path)
            for i in manifest.target_indices
        ]
        return self.evaluate_pairs(pairs)
