"""
Forward 3D Gaussian splatting on the CPU.

Pipeline per view:
1. Project every primitive: camera-space mean, EWA covariance
   cov2d = J W Sigma W^T J^T (+ dilation), SH color along the view ray.
2. Sort by (depth, primitive index).
3. Composite front to back: C = sum_i c_i a_i prod_{j<i} (1 - a_j), with
   a_i = opacity_i * exp(-0.5 d^T cov2d^-1 d), truncated at ``sigma_cutoff``
   standard deviations and clamped to ``max_alpha``.

The frame is split into horizontal bands processed in parallel; each pixel
sees the same sequence of floating-point operations regardless of banding,
so output is bit-identical for any worker count.
"""

from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ...config import RenderSettings
from ...domain.entities import CompositingGradients, FrameBuffer
from ...domain.exceptions import BehindCamera, ShapeMismatch
from ...domain.value_objects import CameraView, GaussianPrimitive, SplatProjection
from .spherical_harmonics import eval_sh
from .worker_pool import WorkerPool

logger = logging.getLogger(__name__)


class SplatRenderer:
    """Projects, sorts and alpha-composites Gaussian primitives."""

    def __init__(self, settings: Optional[RenderSettings] = None, workers: Optional[int] = None):
        self.settings = settings or RenderSettings()
        self.pool = WorkerPool(workers)

    # ------------------------------------------------------------------
    # Projection
    # ------------------------------------------------------------------

    def project_covariance(self, prim: GaussianPrimitive, view: CameraView) -> SplatProjection:
        """Project one primitive into ``view`` (raises BehindCamera if z <= near)."""
        rot = view.extrinsics.rotation
        x, y, z = rot @ prim.mean + view.extrinsics.translation
        if z <= view.near:
            raise BehindCamera("primitive mean is not in front of the near plane",
                               depth=float(z), near=view.near)

        k = view.intrinsics
        jac = np.array([
            [k.fx / z, 0.0, -k.fx * x / (z * z)],
            [0.0, k.fy / z, -k.fy * y / (z * z)],
        ])
        jw = jac @ rot
        cov2d = jw @ prim.covariance @ jw.T
        cov2d = 0.5 * (cov2d + cov2d.T)
        if self.settings.dilation > 0:
            cov2d = cov2d + self.settings.dilation * np.eye(2)

        ray = prim.mean - view.center
        ray /= np.linalg.norm(ray)
        return SplatProjection(
            mean2d=np.array([k.fx * x / z + k.cx, k.fy * y / z + k.cy]),
            cov2d=cov2d,
            depth=float(z),
            color=eval_sh(self.settings.sh_degree, prim.sh, ray),
        )

    def project_sorted(
        self, prims: Sequence[GaussianPrimitive], view: CameraView
    ) -> List[Tuple[int, SplatProjection]]:
        """Projections of the visible primitives, front to back (ties: lower index first)."""
        visible: List[Tuple[int, SplatProjection]] = []
        culled = 0
        for index, prim in enumerate(prims):
            try:
                visible.append((index, self.project_covariance(prim, view)))
            except BehindCamera:
                culled += 1
        if culled:
            logger.debug("Culled %d primitives behind the near plane", culled)
        if not visible:
            return visible
        depths = np.array([p.depth for _, p in visible])
        indices = np.array([i for i, _ in visible])
        order = np.lexsort((indices, depths))
        return [visible[i] for i in order]

    # ------------------------------------------------------------------
    # Rendering
    # ------------------------------------------------------------------

    def _splat_alpha(
        self, proj: SplatProjection, opacity: float, px: np.ndarray, py: np.ndarray
    ) -> np.ndarray:
        """Effective alpha of one splat at pixel centers (px, py)."""
        conic = proj.conic
        dx = px - proj.mean2d[0]
        dy = py - proj.mean2d[1]
        power = conic[0, 0] * dx * dx + 2.0 * conic[0, 1] * dx * dy + conic[1, 1] * dy * dy
        alpha = np.minimum(opacity * np.exp(-0.5 * power), self.settings.max_alpha)
        return np.where(power <= self.settings.sigma_cutoff ** 2, alpha, 0.0)

    def render_view(self, prims: Sequence[GaussianPrimitive], view: CameraView) -> FrameBuffer:
        """Render ``prims`` from ``view``; empty input yields the background."""
        width, height = view.width, view.height
        background = np.asarray(self.settings.background, dtype=np.float64)
        if background.shape != (3,):
            raise ShapeMismatch("background must be an RGB triple",
                                actual=list(background.shape))

        splats = self.project_sorted(prims, view)
        cutoff = self.settings.sigma_cutoff
        boxes = []
        for index, proj in splats:
            r = cutoff * np.sqrt(np.max(np.linalg.eigvalsh(proj.cov2d)))
            mx, my = proj.mean2d
            boxes.append((
                max(0, int(np.floor(my - r))), min(height, int(np.ceil(my + r)) + 1),
                max(0, int(np.floor(mx - r))), min(width, int(np.ceil(mx + r)) + 1),
            ))

        def render_band(row0: int, row1: int) -> Tuple[np.ndarray, np.ndarray]:
            rgb = np.zeros((row1 - row0, width, 3))
            trans = np.ones((row1 - row0, width))
            for (index, proj), (y0, y1, x0, x1) in zip(splats, boxes):
                y0, y1 = max(y0, row0), min(y1, row1)
                if y0 >= y1 or x0 >= x1:
                    continue
                py, px = np.mgrid[y0:y1, x0:x1].astype(np.float64) + 0.5
                alpha = self._splat_alpha(proj, prims[index].opacity, px, py)
                t = trans[y0 - row0:y1 - row0, x0:x1]
                rgb[y0 - row0:y1 - row0, x0:x1] += (t * alpha)[..., None] * proj.color
                trans[y0 - row0:y1 - row0, x0:x1] = t * (1.0 - alpha)
            return rgb, trans

        bands = self.pool.map_ranges(render_band, height)
        rgb = np.concatenate([b[0] for b in bands], axis=0)
        trans = np.concatenate([b[1] for b in bands], axis=0)
        rgb += trans[..., None] * background

        logger.debug("Rendered %dx%d view from %d visible splats", width, height, len(splats))
        return FrameBuffer(
            width=width,
            height=height,
            rgb=np.clip(rgb, 0.0, 1.0),
            accumulated_alpha=np.clip(1.0 - trans, 0.0, 1.0),
        )

    def pixel_stack(
        self, prims: Sequence[GaussianPrimitive], view: CameraView, pixel: Tuple[int, int]
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Sorted (colors (n, 3), effective alphas (n,)) of the splats covering ``pixel``.

        ``pixel`` is (row, col); only splats with a non-zero effective alpha
        are returned, in compositing order.
        """
        row, col = pixel
        px = np.array([col + 0.5])
        py = np.array([row + 0.5])
        colors, alphas = [], []
        for index, proj in self.project_sorted(prims, view):
            alpha = float(self._splat_alpha(proj, prims[index].opacity, px, py)[0])
            if alpha > 0.0:
                colors.append(proj.color)
                alphas.append(alpha)
        return np.array(colors).reshape(-1, 3), np.array(alphas)

    # ------------------------------------------------------------------
    # Compositing and its derivatives
    # ------------------------------------------------------------------

    @staticmethod
    def composite(
        colors: np.ndarray, alphas: np.ndarray, background: Optional[np.ndarray] = None
    ) -> np.ndarray:
        """Front-to-back compositing of one pixel's sorted splats."""
        colors = np.asarray(colors, dtype=np.float64)
        if colors.ndim == 1:
            colors = colors[:, None]
        out = np.zeros(colors.shape[1])
        trans = 1.0
        for c, a in zip(colors, alphas):
            out = out + trans * a * c
            trans = trans * (1.0 - a)
        if background is not None:
            out = out + trans * np.asarray(background, dtype=np.float64)
        return out

    @staticmethod
    def compositing_gradients(
        colors: np.ndarray,
        alphas: np.ndarray,
        background: Optional[np.ndarray] = None,
        falloff: Optional[np.ndarray] = None,
    ) -> CompositingGradients:
        """
        Analytic derivatives of the composited color of one pixel.

        dC/dc_i     = a_i T_i
        dC/da_i     = T_i (c_i - B_i), B_i = color composited behind splat i
                      (including the background)

        Splats with a_i == 0 are inactive: their gradients are zero and they
        do not attenuate later splats. With ``falloff`` (the Gaussian weight
        G_i, a_i = opacity_i G_i) the alpha gradient is taken w.r.t. the raw
        opacity instead.
        """
        colors = np.asarray(colors, dtype=np.float64)
        if colors.ndim == 1:
            colors = colors[:, None]
        alphas = np.asarray(alphas, dtype=np.float64)
        n, k = colors.shape
        if alphas.shape != (n,):
            raise ShapeMismatch("one alpha per splat required",
                                colors=n, alphas=list(alphas.shape))

        one_minus = 1.0 - alphas
        trans = np.concatenate([[1.0], np.cumprod(one_minus)[:-1]]) if n else np.zeros(0)

        behind = np.zeros((n, k))
        acc = np.zeros(k) if background is None else np.asarray(background, dtype=np.float64)
        for i in range(n - 1, -1, -1):
            behind[i] = acc
            acc = alphas[i] * colors[i] + one_minus[i] * acc

        d_color = alphas * trans
        d_alpha = trans[:, None] * (colors - behind)
        active = alphas > 0.0
        d_alpha[~active] = 0.0
        if falloff is not None:
            d_alpha = d_alpha * np.asarray(falloff, dtype=np.float64)[:, None]

        return CompositingGradients(
            d_color=d_color,
            d_alpha=d_alpha,
            transmittance=trans,
            color=acc,
        )
