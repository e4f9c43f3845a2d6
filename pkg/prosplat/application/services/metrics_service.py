"""
Image-quality metrics and reconstruction losses.

- PSNR  = 10 log10(L^2 / MSE); identical images give +inf.
- SSIM  : 11x11 Gaussian window (sigma 1.5), 'valid' filtering,
          C1 = (0.01 L)^2, C2 = (0.03 L)^2, averaged over channels.
- loss  = MSE + lambda * perceptual, summed over views for a batch.

An optional H x W mask restricts every mean to the selected pixels
(for SSIM: to the selected centers of fully-inside windows).
"""

from __future__ import annotations

import logging
from typing import Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.signal import correlate2d
from scipy.signal.windows import gaussian

from ...domain.entities import LossBreakdown
from ...domain.exceptions import EmptyBatch, ImageTooSmall, InvalidConfig, ShapeMismatch

logger = logging.getLogger(__name__)

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
PERCEPTUAL_WEIGHT = 5.0


class PerceptualTerm(Protocol):
    """Pluggable perceptual distance between an enhanced image and its ground truth."""

    placeholder: bool

    def __call__(self, enhanced: np.ndarray, ground_truth: np.ndarray) -> float:
        ...


class ZeroPerceptualTerm:
    """Placeholder perceptual term: always 0, flagged as a placeholder."""

    placeholder = True

    def __call__(self, enhanced: np.ndarray, ground_truth: np.ndarray) -> float:
        return 0.0


class ConstantPerceptualTerm:
    """Fixed perceptual value, for wiring precomputed scores into the loss."""

    placeholder = False

    def __init__(self, value: float):
        self.value = float(value)

    def __call__(self, enhanced: np.ndarray, ground_truth: np.ndarray) -> float:
        return self.value


def _pair(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeMismatch("images must have identical dimensions",
                            a=list(a.shape), b=list(b.shape))
    if a.ndim == 2:
        a, b = a[:, :, None], b[:, :, None]
    if a.ndim != 3:
        raise ShapeMismatch("images must be H x W or H x W x C", shape=list(a.shape))
    return a, b


def _mask(mask: Optional[np.ndarray], shape: Tuple[int, int]) -> np.ndarray:
    if mask is None:
        return np.ones(shape, dtype=bool)
    mask = np.asarray(mask)
    if mask.ndim == 3:
        mask = mask.any(axis=2)
    if mask.shape != shape:
        raise ShapeMismatch("mask must match the image size",
                            mask=list(mask.shape), image=list(shape))
    mask = mask.astype(bool)
    if not mask.any():
        raise InvalidConfig("mask selects no pixels")
    return mask


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    g = gaussian(size, sigma)
    window = np.outer(g, g)
    return window / window.sum()


class MetricsService:
    """PSNR / SSIM / MSE and the improvement losses."""

    def __init__(self, max_val: float = 1.0, perceptual_weight: float = PERCEPTUAL_WEIGHT):
        self.max_val = max_val
        self.perceptual_weight = perceptual_weight

    # ------------------------------------------------------------------
    # Pixel metrics
    # ------------------------------------------------------------------

    @staticmethod
    def mse(a: np.ndarray, b: np.ndarray, mask: Optional[np.ndarray] = None) -> float:
        a, b = _pair(a, b)
        m = _mask(mask, a.shape[:2])
        sq = (a - b) ** 2
        return float(np.mean(sq[m]))

    def psnr(self, a: np.ndarray, b: np.ndarray, mask: Optional[np.ndarray] = None,
             max_val: Optional[float] = None) -> float:
        """PSNR in dB; +inf when the (masked) images are identical."""
        peak = self.max_val if max_val is None else max_val
        err = self.mse(a, b, mask)
        if err == 0.0:
            return float("inf")
        return float(10.0 * np.log10(peak * peak / err))

    # ------------------------------------------------------------------
    # SSIM
    # ------------------------------------------------------------------

    def _ssim_maps(self, a: np.ndarray, b: np.ndarray,
                   max_val: Optional[float]) -> Tuple[np.ndarray, np.ndarray]:
        a, b = _pair(a, b)
        if min(a.shape[:2]) < SSIM_WINDOW:
            raise ImageTooSmall("image smaller than the SSIM window",
                                shape=list(a.shape[:2]), window=SSIM_WINDOW)
        peak = self.max_val if max_val is None else max_val
        c1 = (SSIM_K1 * peak) ** 2
        c2 = (SSIM_K2 * peak) ** 2
        window = gaussian_window()

        def filt(x: np.ndarray) -> np.ndarray:
            return correlate2d(x, window, mode="valid")

        lum, cs = [], []
        for ch in range(a.shape[2]):
            x, y = a[:, :, ch], b[:, :, ch]
            mu_x, mu_y = filt(x), filt(y)
            var_x = filt(x * x) - mu_x ** 2
            var_y = filt(y * y) - mu_y ** 2
            cov = filt(x * y) - mu_x * mu_y
            lum.append((2.0 * mu_x * mu_y + c1) / (mu_x ** 2 + mu_y ** 2 + c1))
            cs.append((2.0 * cov + c2) / (var_x + var_y + c2))
        return np.stack(lum, axis=2), np.stack(cs, axis=2)

    def ssim_components(self, a: np.ndarray, b: np.ndarray,
                        max_val: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """(luminance, contrast-structure) maps, channel-averaged, on the 'valid' grid."""
        lum, cs = self._ssim_maps(a, b, max_val)
        return lum.mean(axis=2), cs.mean(axis=2)

    def ssim(self, a: np.ndarray, b: np.ndarray, mask: Optional[np.ndarray] = None,
             max_val: Optional[float] = None) -> float:
        lum, cs = self._ssim_maps(a, b, max_val)
        ssim_map = (lum * cs).mean(axis=2)
        h, w = np.asarray(a).shape[:2]
        half = SSIM_WINDOW // 2
        m = _mask(mask, (h, w))[half:h - half, half:w - half]
        if not m.any():
            raise InvalidConfig("mask selects no fully-inside SSIM windows")
        return float(np.mean(ssim_map[m]))

    # ------------------------------------------------------------------
    # Losses
    # ------------------------------------------------------------------

    def improvement_loss(
        self,
        enhanced: np.ndarray,
        ground_truth: np.ndarray,
        perceptual_term: Optional[PerceptualTerm] = None,
        mask: Optional[np.ndarray] = None,
    ) -> LossBreakdown:
        """MSE + lambda * perceptual for one view."""
        term = perceptual_term or ZeroPerceptualTerm()
        err = self.mse(enhanced, ground_truth, mask)
        perceptual = float(term(enhanced, ground_truth))
        placeholder = bool(getattr(term, "placeholder", False))
        if placeholder:
            logger.warning("Perceptual term is a zero placeholder; loss reduces to MSE")
        return LossBreakdown(
            mse=err,
            perceptual=perceptual,
            weight=self.perceptual_weight,
            total=err + self.perceptual_weight * perceptual,
            views=1,
            perceptual_placeholder=placeholder,
        )

    def joint_loss(
        self,
        pairs: Sequence[Tuple[np.ndarray, np.ndarray]],
        perceptual_term: Optional[PerceptualTerm] = None,
        mask: Optional[np.ndarray] = None,
    ) -> LossBreakdown:
        """Sum of per-view improvement losses over all views of a batch."""
        if not pairs:
            raise EmptyBatch("joint loss needs at least one view")
        parts = [self.improvement_loss(enh, gt, perceptual_term, mask) for enh, gt in pairs]
        return LossBreakdown(
            mse=sum(p.mse for p in parts),
            perceptual=sum(p.perceptual for p in parts),
            weight=self.perceptual_weight,
            total=sum(p.total for p in parts),
            views=len(parts),
            perceptual_placeholder=any(p.perceptual_placeholder for p in parts),
        )
