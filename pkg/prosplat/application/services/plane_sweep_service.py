"""
Plane-sweep stereo at feature-grid resolution.

For each depth candidate d, the source features are warped into the
reference view through the fronto-parallel plane z = d of the reference
camera, H = K_src (R_rel + t_rel n^T / d) K_ref^-1 with n = (0, 0, 1), and
correlated with the reference features (dot product over channels / c).
Feature grids use the view intrinsics rescaled to the grid size.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.ndimage import map_coordinates

from ...config import SweepSettings
from ...domain.entities import CostVolume, FeatureGrid, WarpResult
from ...domain.enums import DepthReadout, DepthSpacing
from ...domain.exceptions import EmptyInputSet, InvalidRange, ShapeMismatch
from ...domain.value_objects import CameraView
from .resampling import block_mean
from .worker_pool import WorkerPool

logger = logging.getLogger(__name__)

FEATURE_EPS = 1e-12


class PlaneSweepService:
    """Depth candidates, homography warps and dot-product cost volumes."""

    def __init__(self, settings: Optional[SweepSettings] = None, workers: Optional[int] = None):
        self.settings = settings or SweepSettings()
        self.pool = WorkerPool(workers)

    # ------------------------------------------------------------------
    # Depth candidates
    # ------------------------------------------------------------------

    @staticmethod
    def sample_depth_candidates(
        near: float,
        far: float,
        count: int,
        spacing: DepthSpacing = DepthSpacing.INVERSE,
    ) -> np.ndarray:
        """``count`` increasing depths in [near, far] with exact endpoints."""
        if not (0 < near < far) or count < 1:
            raise InvalidRange("need 0 < near < far and at least one candidate",
                               near=near, far=far, count=count)
        if count == 1:
            return np.array([float(near)])
        if spacing is DepthSpacing.LINEAR:
            depths = np.linspace(near, far, count)
        else:
            depths = 1.0 / np.linspace(1.0 / near, 1.0 / far, count)
        depths[0], depths[-1] = near, far
        return depths

    # ------------------------------------------------------------------
    # Warping
    # ------------------------------------------------------------------

    @staticmethod
    def plane_homography(src_view: CameraView, dst_view: CameraView, grid: Tuple[int, int],
                         depth: float) -> np.ndarray:
        """Homography from destination grid pixels to source grid pixels for plane z = depth."""
        h, w = grid
        k_src = src_view.intrinsics.scaled(w, h)
        k_dst = dst_view.intrinsics.scaled(w, h)
        r_src, t_src = src_view.extrinsics.rotation, src_view.extrinsics.translation
        r_dst, t_dst = dst_view.extrinsics.rotation, dst_view.extrinsics.translation
        r_rel = r_src @ r_dst.T
        t_rel = t_src - r_rel @ t_dst
        normal = np.array([0.0, 0.0, 1.0])
        return k_src.matrix @ (r_rel + np.outer(t_rel, normal) / depth) @ k_dst.inverse

    def warp_feature(
        self,
        src: FeatureGrid,
        src_view: CameraView,
        dst_view: CameraView,
        depth: float,
    ) -> WarpResult:
        """Warp ``src`` into ``dst_view`` through the plane at ``depth``.

        A cell is valid iff its reprojection lies in [0, w) x [0, h) of the
        source grid in front of the source camera; invalid cells are zero.
        Sampling is bilinear with zero padding past the outer cell centers.
        """
        h, w = src.dims
        hom = self.plane_homography(src_view, dst_view, (h, w), depth)
        gy, gx = np.mgrid[0:h, 0:w].astype(np.float64) + 0.5
        pts = np.stack([gx.ravel(), gy.ravel(), np.ones(h * w)])
        proj = hom @ pts
        z = proj[2]
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.where(z > 0, proj[0] / z, -1.0)
            v = np.where(z > 0, proj[1] / z, -1.0)
        valid = (z > 0) & (u >= 0) & (u < w) & (v >= 0) & (v < h)

        coords = [v - 0.5, u - 0.5]
        data = np.empty((h * w, src.c))
        for ch in range(src.c):
            data[:, ch] = map_coordinates(src.data[:, :, ch], coords, order=1,
                                           mode="grid-constant", cval=0.0)
        data[~valid] = 0.0
        return WarpResult(grid=FeatureGrid(data.reshape(h, w, src.c)),
                          valid=valid.reshape(h, w))

    # ------------------------------------------------------------------
    # Cost volume
    # ------------------------------------------------------------------

    def build_cost_volume(
        self,
        ref_feat: FeatureGrid,
        others: Sequence[Tuple[FeatureGrid, CameraView]],
        ref_view: CameraView,
        depths: Sequence[float],
    ) -> CostVolume:
        """values[i, j, m] = mean over other views of <warp(other, d_m)(i, j), ref(i, j)> / c."""
        if not others:
            raise EmptyInputSet("cost volume needs at least one other view")
        for feat, _ in others:
            if feat.data.shape != ref_feat.data.shape:
                raise ShapeMismatch("feature grids must share h, w, c",
                                    expected=list(ref_feat.data.shape),
                                    actual=list(feat.data.shape))
        depths = np.asarray(depths, dtype=np.float64)
        h, w, c = ref_feat.data.shape

        def depth_slice(depth: float) -> Tuple[np.ndarray, np.ndarray]:
            total = np.zeros((h, w))
            count = np.zeros((h, w), dtype=np.int64)
            for feat, view in others:
                warped = self.warp_feature(feat, view, ref_view, depth)
                total += np.sum(warped.grid.data * ref_feat.data, axis=2) / c
                count += warped.valid
            return total / len(others), count

        slices = self.pool.map_ordered(depth_slice, depths)
        logger.debug("Cost volume %dx%dx%d from %d views", h, w, len(depths), len(others))
        return CostVolume(
            values=np.stack([s[0] for s in slices], axis=2),
            depths=depths,
            valid_counts=np.stack([s[1] for s in slices], axis=2),
        )

    @staticmethod
    def depth_from_cost_volume(
        volume: CostVolume,
        readout: DepthReadout = DepthReadout.ARGMAX,
        temperature: float = 1.0,
    ) -> np.ndarray:
        """Per-pixel depth estimate (h, w) from a cost volume."""
        if readout is DepthReadout.SOFT_ARGMAX:
            logits = volume.values / temperature
            logits = logits - logits.max(axis=2, keepdims=True)
            weights = np.exp(logits)
            weights /= weights.sum(axis=2, keepdims=True)
            return weights @ volume.depths
        return volume.depths[np.argmax(volume.values, axis=2)]

    # ------------------------------------------------------------------
    # Toy features
    # ------------------------------------------------------------------

    @staticmethod
    def image_features(image: np.ndarray, scale: int) -> FeatureGrid:
        """Zero-mean, unit-norm 3x3 luminance patches on a ``scale``-pooled grid (9 channels)."""
        gray = np.asarray(image, dtype=np.float64).mean(axis=2)
        pooled = block_mean(gray, scale)
        padded = np.pad(pooled, 1, mode="edge")
        h, w = pooled.shape
        patches = np.stack(
            [padded[dy:dy + h, dx:dx + w] for dy in range(3) for dx in range(3)], axis=2
        )
        patches -= patches.mean(axis=2, keepdims=True)
        norm = np.linalg.norm(patches, axis=2, keepdims=True)
        return FeatureGrid(patches / np.maximum(norm, FEATURE_EPS))

    def sweep(
        self,
        ref_feat: FeatureGrid,
        others: Sequence[Tuple[FeatureGrid, CameraView]],
        ref_view: CameraView,
    ) -> CostVolume:
        """Cost volume over the configured candidates of ``ref_view``'s depth range."""
        depths = self.sample_depth_candidates(
            ref_view.near, ref_view.far, self.settings.depth_candidates, self.settings.spacing
        )
        return self.build_cost_volume(ref_feat, others, ref_view, depths)
