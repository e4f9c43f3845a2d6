"""Pixel-aligned Gaussian layout: one primitive per pixel, unprojected at its depth."""

from typing import List

import numpy as np

from ...domain.exceptions import ShapeMismatch
from ...domain.value_objects import CameraView, GaussianPrimitive
from .spherical_harmonics import rgb_to_sh_dc


class GaussianLayoutService:
    """One pixel-aligned Gaussian per sampled pixel of a depth map."""

    @staticmethod
    def primitives_from_depth(
        image: np.ndarray,
        depth: np.ndarray,
        view: CameraView,
        opacity: float = 0.9,
        scale_factor: float = 1.0,
        stride: int = 1,
    ) -> List[GaussianPrimitive]:
        """
        Build one isotropic primitive per (strided) pixel.

        The mean is the pixel center unprojected to ``depth``; the scale is
        ``scale_factor * stride * depth / f`` so a splat covers about one
        (strided) pixel footprint; the DC color reproduces the pixel color.
        """
        image = np.asarray(image, dtype=np.float64)
        depth = np.asarray(depth, dtype=np.float64)
        if image.ndim != 3 or image.shape[2] != 3 or depth.shape != image.shape[:2]:
            raise ShapeMismatch("image must be H x W x 3 and depth H x W",
                                image=list(image.shape), depth=list(depth.shape))

        k = view.intrinsics
        rot_t = view.extrinsics.rotation.T
        trans = view.extrinsics.translation
        focal = 0.5 * (k.fx + k.fy)

        prims: List[GaussianPrimitive] = []
        for row in range(0, image.shape[0], stride):
            for col in range(0, image.shape[1], stride):
                z = depth[row, col]
                if not np.isfinite(z) or z <= view.near:
                    continue
                cam = np.array([(col + 0.5 - k.cx) / k.fx * z,
                                (row + 0.5 - k.cy) / k.fy * z,
                                z])
                sigma = scale_factor * stride * z / focal
                prims.append(GaussianPrimitive(
                    mean=rot_t @ (cam - trans),
                    sh=rgb_to_sh_dc(image[row, col]).reshape(1, 3),
                    scale=np.full(3, sigma),
                    opacity=opacity,
                ))
        return prims
