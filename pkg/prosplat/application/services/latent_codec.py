"""Deterministic image <-> latent mapping standing in for a VAE.

encode: average-pool by ``latent_scale``, center at 0.5, lift 3 -> c channels
with a seeded linear map. decode: pseudo-inverse channel projection c -> 3,
bilinear upsample to the requested size.
"""

import numpy as np

from ...domain.entities import FeatureGrid
from ...domain.exceptions import InvalidConfig, ShapeMismatch
from ...domain.value_objects import LATENT_SCALES
from .resampling import bilinear_resize, block_mean


class LatentCodec:
    """Seeded linear image <-> latent mapping at 1/latent_scale resolution."""

    def __init__(self, channels: int = 8, latent_scale: int = 8, seed: int = 0):
        if channels < 1:
            raise InvalidConfig("channels must be >= 1", channels=channels)
        if latent_scale not in LATENT_SCALES:
            raise InvalidConfig("latent_scale must be one of 1, 2, 4, 8",
                                latent_scale=latent_scale)
        self.channels = channels
        self.latent_scale = latent_scale
        rng = np.random.default_rng(seed)
        self.lift = rng.normal(0.0, 1.0 / np.sqrt(3.0), (3, channels))
        self.project = np.linalg.pinv(self.lift)

    def encode(self, image: np.ndarray) -> FeatureGrid:
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 3 or image.shape[2] != 3:
            raise ShapeMismatch("image must be H x W x 3", shape=list(image.shape))
        pooled = block_mean(image, self.latent_scale)
        return FeatureGrid((pooled - 0.5) @ self.lift)

    def decode(self, latent: FeatureGrid, height: int, width: int) -> np.ndarray:
        if latent.c != self.channels:
            raise ShapeMismatch("latent channels do not match the codec",
                                expected=self.channels, actual=latent.c)
        rgb = latent.data @ self.project + 0.5
        return np.clip(bilinear_resize(rgb, height, width), 0.0, 1.0)
