"""
Maximum-overlap reference-view selection.

    dist  = || C_tgt - C_in ||            (camera centers, or raw T by flag)
    angle = <z_tgt, z_in> / (|z_tgt| |z_in|)
    score = 1 / max(dist, eps) + (angle + 1) / 2

The winner is the argmax; ties resolve to the lowest input index.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ...config import SelectionSettings
from ...domain.entities import OverlapScore
from ...domain.enums import DistanceMode, SelectionStrategy, ViewingAxisFrame
from ...domain.exceptions import EmptyInputSet
from ...domain.value_objects import CameraView

logger = logging.getLogger(__name__)


class ViewSelectionService:
    """Stateless scorer; safe to share between threads."""

    def __init__(self, settings: Optional[SelectionSettings] = None):
        self.settings = settings or SelectionSettings()

    def _position(self, view: CameraView) -> np.ndarray:
        if self.settings.distance_mode is DistanceMode.RAW_TRANSLATION:
            return np.asarray(view.extrinsics.translation)
        return view.center

    def _viewing_axis(self, view: CameraView) -> np.ndarray:
        rot = view.extrinsics.rotation
        if self.settings.axis_frame is ViewingAxisFrame.WORLD_TO_CAMERA:
            return rot[:, 2]
        # Third column of the camera-to-world rotation: world-space optical axis.
        return rot.T[:, 2]

    def _combine(self, dist: float, angle: float) -> float:
        distance_term = 1.0 / max(dist, self.settings.eps)
        angle_term = (angle + 1.0) / 2.0
        strategy = self.settings.strategy
        if strategy is SelectionStrategy.DISTANCE:
            return distance_term
        if strategy is SelectionStrategy.ANGLE:
            return angle_term
        return distance_term + angle_term

    def _measure(self, tgt: CameraView, view: CameraView) -> Tuple[float, float]:
        dist = float(np.linalg.norm(self._position(tgt) - self._position(view)))
        a, b = self._viewing_axis(tgt), self._viewing_axis(view)
        angle = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
        return dist, float(np.clip(angle, -1.0, 1.0))

    def overlap_score(self, tgt: CameraView, view: CameraView, index: int = 0) -> OverlapScore:
        """Score one candidate view against the target."""
        dist, angle = self._measure(tgt, view)
        return OverlapScore(view_index=index, dist=dist, angle=angle,
                            score=self._combine(dist, angle), raw_dist=dist)

    def score_all(self, tgt: CameraView, inputs: Sequence[CameraView]) -> List[OverlapScore]:
        """Scores of every candidate, in input order."""
        if not inputs:
            raise EmptyInputSet("no input views to select from")
        measures = [self._measure(tgt, view) for view in inputs]
        scale = 1.0
        if self.settings.normalize_distance:
            largest = max(dist for dist, _ in measures)
            scale = largest if largest > 0 else 1.0
        return [
            OverlapScore(view_index=i, dist=dist / scale, angle=angle,
                         score=self._combine(dist / scale, angle), raw_dist=dist)
            for i, (dist, angle) in enumerate(measures)
        ]

    def select_reference(
        self, tgt: CameraView, inputs: Sequence[CameraView]
    ) -> Tuple[int, OverlapScore]:
        """(index, score) of the maximum-overlap input view."""
        scores = self.score_all(tgt, inputs)
        # np.argmax returns the first maximum: lowest index wins ties.
        best = int(np.argmax([s.score for s in scores]))
        logger.debug("Reference view %d selected (score %.6g) among %d candidates",
                     best, scores[best].score, len(scores))
        return best, scores[best]
