"""Shared pytest fixtures for the prosplat test suite.

Provides:
- Camera factories (axis-aligned and random look-at views)
- A seeded numpy Generator
- The bundled three-view scene under data/synthetic_scene
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

# Uncapped, so the explicit worker counts passed by tests take effect.
os.environ.setdefault("PROSPLAT_THREADS", "0")

from prosplat.application.services.geometry_service import GeometryService  # noqa: E402
from prosplat.domain.value_objects import (  # noqa: E402
    CameraExtrinsics,
    CameraIntrinsics,
    CameraView,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
BUNDLED_SCENE = REPO_ROOT / "data" / "synthetic_scene"


def intrinsics(width: int = 64, height: int = 48, focal: float = 0.9) -> CameraIntrinsics:
    f = focal * width
    return CameraIntrinsics(fx=f, fy=f, cx=0.5 * width, cy=0.5 * height,
                            width=width, height=height)


def view_at(center, rotation=None, width: int = 64, height: int = 48,
            near: float = 0.5, far: float = 10.0) -> CameraView:
    """View with world-to-camera rotation ``rotation`` (default identity) centered at ``center``."""
    rot = np.eye(3) if rotation is None else np.asarray(rotation, dtype=np.float64)
    center = np.asarray(center, dtype=np.float64)
    ext = CameraExtrinsics(rotation=rot, translation=-rot @ center)
    return CameraView(intrinsics(width, height), ext, near, far)


def random_look_at_view(rng: np.random.Generator, width: int = 64, height: int = 48) -> CameraView:
    """Camera 3 to 6 units from the origin looking at a point near it."""
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    eye = direction * rng.uniform(3.0, 6.0)
    target = rng.normal(scale=0.2, size=3)
    ext = GeometryService.look_at(eye, target)
    focal = rng.uniform(0.6, 1.2)
    k = CameraIntrinsics(fx=focal * width, fy=focal * width * rng.uniform(0.9, 1.1),
                         cx=width * rng.uniform(0.4, 0.6), cy=height * rng.uniform(0.4, 0.6),
                         width=width, height=height)
    return CameraView(k, ext, 0.5, 20.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def make_view():
    return view_at


@pytest.fixture
def make_random_view():
    return random_look_at_view


@pytest.fixture
def bundled_scene() -> Path:
    return BUNDLED_SCENE
