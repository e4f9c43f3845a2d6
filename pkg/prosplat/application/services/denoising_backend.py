"""One-step denoising backends.

A backend receives the target latent, the injected feature grids and the
diffusion timestep, and returns an enhanced latent of the same shape.
Only the identity backend ships with the library; pretrained backends
register themselves under a new name.
"""

from abc import ABC, abstractmethod
from typing import Dict, Sequence, Type

from ...domain.entities import FeatureGrid
from ...domain.exceptions import InvalidConfig, ShapeMismatch
from .resampling import resample_to


class DenoisingBackend(ABC):
    """Abstract base for latent enhancement backends."""

    name: str = ""

    @abstractmethod
    def enhance(
        self,
        latent: FeatureGrid,
        injections: Sequence[FeatureGrid],
        timestep: int,
    ) -> FeatureGrid:
        """Return an enhanced latent with the shape of ``latent``."""
        ...


class IdentityBackend(DenoisingBackend):
    """latent + every injection resampled to the latent grid."""

    name = "identity"

    def enhance(
        self,
        latent: FeatureGrid,
        injections: Sequence[FeatureGrid],
        timestep: int,
    ) -> FeatureGrid:
        out = latent.data.copy()
        for grid in injections:
            if grid.c != latent.c:
                raise ShapeMismatch("injected features must match the latent channels",
                                    expected=latent.c, actual=grid.c)
            out += resample_to(grid.data, latent.h, latent.w)
        return FeatureGrid(out)


BACKENDS: Dict[str, Type[DenoisingBackend]] = {
    IdentityBackend.name: IdentityBackend,
}


def register_backend(cls: Type[DenoisingBackend]) -> Type[DenoisingBackend]:
    BACKENDS[cls.name] = cls
    return cls


def get_backend(name: str) -> DenoisingBackend:
    try:
        return BACKENDS[name]()
    except KeyError:
        raise InvalidConfig(f"unknown denoising backend '{name}'",
                            available=sorted(BACKENDS)) from None
