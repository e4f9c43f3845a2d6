"""
Epipolar-weighted attention between a target and a reference feature grid.

    Q = tgt Wq, K = ref Wk, V = ref Wv
    attn_g    = softmax_rows(Q K^T / sqrt(dk))            (optional)
    attn_comb = attn_g * Norm(exp(-d))                    (d: epipolar distances)
    gate      = sigmoid(attn_comb)                        (optional)
    out       = gate V

Norm is min-max to [0, 1], per target row (default) or over the whole map.
A constant map normalizes to all ones; rows flagged degenerate by the
distance map get zero modulation under per-row scope.
Plain fusion replaces the modulation with ones (ordinary cross-attention).

The fused grid is then upsampled by 2 and 4 and passed through a
depthwise 3x3 (zero-padded) + pointwise convolution per stage.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.signal import correlate2d
from scipy.special import expit, softmax

from ...domain.entities import (
    AttentionMaps,
    DepthwiseSeparableWeights,
    EpipolarDistanceMap,
    FeatureGrid,
    ProjectionWeights,
)
from ...domain.enums import FusionMode, NormScope
from ...domain.exceptions import ShapeMismatch
from ...domain.value_objects import AttentionConfig
from .resampling import upsample
from .worker_pool import WorkerPool

logger = logging.getLogger(__name__)


class AttentionService:
    """Distance-weighted epipolar attention and the injection-stage convolutions."""

    def __init__(self, config: Optional[AttentionConfig] = None, workers: Optional[int] = None):
        self.config = config or AttentionConfig()
        self.pool = WorkerPool(workers)

    # ------------------------------------------------------------------
    # Distance modulation
    # ------------------------------------------------------------------

    @staticmethod
    def modulation(
        distances: np.ndarray,
        degenerate_rows: Optional[np.ndarray] = None,
        scope: NormScope = NormScope.ROW,
    ) -> np.ndarray:
        """Norm(exp(-d)) with min-max normalization to [0, 1]."""
        weights = np.exp(-np.asarray(distances, dtype=np.float64))
        if degenerate_rows is None:
            degenerate_rows = np.zeros(weights.shape[0], dtype=bool)

        if scope is NormScope.GLOBAL:
            usable = weights[~degenerate_rows]
            lo = usable.min() if usable.size else 0.0
            hi = usable.max() if usable.size else 0.0
            if hi > lo:
                out = (weights - lo) / (hi - lo)
            else:
                out = np.ones_like(weights)
        else:
            lo = weights.min(axis=1, keepdims=True)
            hi = weights.max(axis=1, keepdims=True)
            span = hi - lo
            constant = span <= 0.0
            out = np.where(constant, 1.0, (weights - lo) / np.where(constant, 1.0, span))

        out[degenerate_rows] = 0.0
        return out

    # ------------------------------------------------------------------
    # Attention
    # ------------------------------------------------------------------

    def _check(self, tgt: FeatureGrid, ref: FeatureGrid, dmap: EpipolarDistanceMap,
               weights: ProjectionWeights) -> None:
        if tgt.dims != tuple(dmap.target_dims) or ref.dims != tuple(dmap.ref_dims):
            raise ShapeMismatch("feature grids do not match the distance map",
                                target=list(tgt.dims), ref=list(ref.dims),
                                map_target=list(dmap.target_dims),
                                map_ref=list(dmap.ref_dims))
        if tgt.c != weights.channels or ref.c != weights.channels:
            raise ShapeMismatch("feature channels do not match the projection weights",
                                target=tgt.c, ref=ref.c, weights=weights.channels)

    def attention_maps(
        self,
        tgt: FeatureGrid,
        ref: FeatureGrid,
        dmap: EpipolarDistanceMap,
        weights: ProjectionWeights,
    ) -> AttentionMaps:
        """All intermediate (P x Q) matrices of one forward pass."""
        self._check(tgt, ref, dmap, weights)
        cfg = self.config
        q = tgt.flat() @ weights.wq
        k = ref.flat() @ weights.wk
        if cfg.fusion is FusionMode.PLAIN:
            mod = np.ones_like(dmap.distances, dtype=np.float64)
        else:
            mod = self.modulation(dmap.distances, dmap.degenerate_rows, cfg.norm_scope)

        def rows(start: int, stop: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
            scores = q[start:stop] @ k.T / np.sqrt(weights.dk)
            if cfg.apply_softmax:
                scores = softmax(scores, axis=1)
            combined = scores * mod[start:stop]
            gate = expit(combined) if cfg.apply_sigmoid else combined
            return scores, combined, gate

        parts = self.pool.map_ranges(rows, q.shape[0])
        return AttentionMaps(
            scores=np.concatenate([p[0] for p in parts], axis=0),
            modulation=mod,
            combined=np.concatenate([p[1] for p in parts], axis=0),
            gate=np.concatenate([p[2] for p in parts], axis=0),
        )

    def dwea_attention(
        self,
        tgt: FeatureGrid,
        ref: FeatureGrid,
        dmap: EpipolarDistanceMap,
        weights: ProjectionWeights,
        maps: Optional[AttentionMaps] = None,
    ) -> FeatureGrid:
        """Gated value sum on the target grid (h_t, w_t, dk); the caller adds it to tgt."""
        if maps is None:
            maps = self.attention_maps(tgt, ref, dmap, weights)
        values = ref.flat() @ weights.wv
        out = maps.gate @ values
        return FeatureGrid(out.reshape(tgt.h, tgt.w, weights.dk))

    def fuse(
        self,
        tgt: FeatureGrid,
        ref: FeatureGrid,
        dmap: EpipolarDistanceMap,
        weights: ProjectionWeights,
        maps: Optional[AttentionMaps] = None,
    ) -> FeatureGrid:
        """tgt + attention output (needs dk == c)."""
        if weights.dk != tgt.c:
            raise ShapeMismatch("residual fusion needs dk equal to the channel count",
                                dk=weights.dk, channels=tgt.c)
        out = self.dwea_attention(tgt, ref, dmap, weights, maps)
        logger.debug("Attention fused %dx%d target against %dx%d reference",
                     tgt.h, tgt.w, ref.h, ref.w)
        return FeatureGrid(tgt.data + out.data)

    # ------------------------------------------------------------------
    # Injection path
    # ------------------------------------------------------------------

    @staticmethod
    def depthwise_separable(data: np.ndarray, dsc: DepthwiseSeparableWeights) -> np.ndarray:
        """Per-channel 3x3 cross-correlation (zero padding), then y = x @ pointwise."""
        c = data.shape[2]
        if dsc.depthwise.shape != (c, 3, 3) or dsc.pointwise.shape[0] != c:
            raise ShapeMismatch("depthwise-separable weights do not match the channels",
                                channels=c)
        depthwise = np.stack(
            [correlate2d(data[:, :, ch], dsc.depthwise[ch], mode="same",
                         boundary="fill", fillvalue=0.0)
             for ch in range(c)],
            axis=2,
        )
        return depthwise @ dsc.pointwise

    def fuse_and_inject(
        self, fused: FeatureGrid, weights: ProjectionWeights
    ) -> Tuple[FeatureGrid, FeatureGrid]:
        """(x2, x4) injection features: bilinear upsample then depthwise-separable conv."""
        stages: List[FeatureGrid] = []
        for factor, dsc in ((2, weights.dsc_x2), (4, weights.dsc_x4)):
            stages.append(FeatureGrid(self.depthwise_separable(upsample(fused.data, factor), dsc)))
        return stages[0], stages[1]
