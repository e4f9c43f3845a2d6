"""Grid resampling helpers shared by the sweep, attention and codec services.

All resizes use half-pixel centers: output cell i samples the input at
(i + 0.5) * in / out - 0.5, with edge clamping.
"""

from typing import Tuple

import numpy as np
from scipy.ndimage import map_coordinates

from ...domain.exceptions import ShapeMismatch


def pooled_grid(width: int, height: int, factor: int) -> Tuple[int, int]:
    """(h, w) of an image pooled by ``factor``; the image must tile exactly.

    Column j of the grid covers pixels [factor * j, factor * (j + 1)).
    """
    if factor < 1 or width % factor or height % factor or width < factor or height < factor:
        raise ShapeMismatch("image size must be a positive multiple of the pooling factor",
                            width=width, height=height, factor=factor)
    return height // factor, width // factor


def block_mean(data: np.ndarray, factor: int) -> np.ndarray:
    """Average-pool the two leading axes by an integer factor (trailing remainder cropped)."""
    if factor == 1:
        return np.asarray(data, dtype=np.float64)
    h, w = data.shape[0] // factor, data.shape[1] // factor
    if h < 1 or w < 1:
        raise ShapeMismatch("grid smaller than the pooling factor",
                            shape=list(data.shape[:2]), factor=factor)
    cropped = np.asarray(data[:h * factor, :w * factor], dtype=np.float64)
    return cropped.reshape(h, factor, w, factor, *data.shape[2:]).mean(axis=(1, 3))


def bilinear_resize(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Bilinear resize of an (h, w) or (h, w, c) array."""
    data = np.asarray(data, dtype=np.float64)
    h, w = data.shape[:2]
    ys = (np.arange(out_h) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w) + 0.5) * (w / out_w) - 0.5
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    if data.ndim == 2:
        return map_coordinates(data, [gy, gx], order=1, mode="nearest")
    return np.stack(
        [map_coordinates(data[:, :, ch], [gy, gx], order=1, mode="nearest")
         for ch in range(data.shape[2])],
        axis=2,
    )


def upsample(data: np.ndarray, factor: int) -> np.ndarray:
    return bilinear_resize(data, data.shape[0] * factor, data.shape[1] * factor)


def resample_to(data: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Block-mean when shrinking by an integer factor, bilinear otherwise."""
    h, w = data.shape[:2]
    if (h, w) == (out_h, out_w):
        return np.asarray(data, dtype=np.float64)
    if h % out_h == 0 and w % out_w == 0 and h // out_h == w // out_w:
        return block_mean(data, h // out_h)
    return bilinear_resize(data, out_h, out_w)
