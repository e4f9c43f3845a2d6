"""Domain entities for prosplat: grids, maps, volumes, scores, scenes."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .exceptions import InvalidConfig, NonRigidRotation, ShapeMismatch
from .value_objects import (
    CameraExtrinsics,
    CameraIntrinsics,
    CameraView,
    check_rotation,
    nearest_rotation,
)


# ============================================================================
# Geometry
# ============================================================================

@dataclass
class EpipolarDistanceMap:
    """Point-to-epipolar-line distances, target grid rows x reference grid columns.

    ``distances[p, q]`` is measured in reference-grid pixels; ``p`` and ``q``
    index their grids row-major. Rows whose target pixel coincides with the
    epipole are filled with ``sentinel`` and flagged in ``degenerate_rows``.
    """
    target_dims: Tuple[int, int]
    ref_dims: Tuple[int, int]
    distances: np.ndarray
    degenerate_rows: np.ndarray
    sentinel: float = 0.0

    def __post_init__(self):
        p = self.target_dims[0] * self.target_dims[1]
        q = self.ref_dims[0] * self.ref_dims[1]
        if self.distances.shape != (p, q):
            raise ShapeMismatch("distance matrix does not match grid dims",
                                expected=[p, q], actual=list(self.distances.shape))

    @property
    def has_degenerate_rows(self) -> bool:
        return bool(np.any(self.degenerate_rows))

    def row_image(self, target_index: int) -> np.ndarray:
        """Distances of one target pixel laid out on the reference grid."""
        return self.distances[target_index].reshape(self.ref_dims)


# ============================================================================
# Rendering
# ============================================================================

@dataclass
class FrameBuffer:
    """Rendered image plus accumulated opacity."""
    width: int
    height: int
    rgb: np.ndarray                 # (H, W, 3)
    accumulated_alpha: np.ndarray   # (H, W)


@dataclass
class CompositingGradients:
    """Analytic derivatives of one pixel's composited color."""
    d_color: np.ndarray      # (n,)   dC/dc_i (same for every channel)
    d_alpha: np.ndarray      # (n, k) dC/dalpha_i per color channel
    transmittance: np.ndarray  # (n,) T_i = prod_{j<i} (1 - alpha_j)
    color: np.ndarray        # (k,) composited color


# ============================================================================
# Feature grids / plane sweep
# ============================================================================

@dataclass
class FeatureGrid:
    """Dense H x W x C feature array."""
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim == 2:
            data = data[:, :, None]
        if data.ndim != 3 or min(data.shape) < 1:
            raise ShapeMismatch("feature grid must be h x w x c with h, w, c >= 1",
                                shape=list(data.shape))
        if not np.all(np.isfinite(data)):
            raise ShapeMismatch("feature grid contains non-finite values")
        self.data = data

    @property
    def h(self) -> int:
        return self.data.shape[0]

    @property
    def w(self) -> int:
        return self.data.shape[1]

    @property
    def c(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> Tuple[int, int]:
        return self.h, self.w

    def flat(self) -> np.ndarray:
        """(h*w, c) row-major view."""
        return self.data.reshape(-1, self.c)

    @classmethod
    def zeros(cls, h: int, w: int, c: int) -> "FeatureGrid":
        return cls(np.zeros((h, w, c)))


@dataclass
class WarpResult:
    """A warped feature grid and which cells sampled inside the source."""
    grid: FeatureGrid
    valid: np.ndarray  # (h, w) bool


@dataclass
class CostVolume:
    """Per-pixel, per-depth-candidate matching scores."""
    values: np.ndarray        # (h, w, D)
    depths: np.ndarray        # (D,)
    valid_counts: np.ndarray  # (h, w, D) number of views with a valid warp

    @property
    def h(self) -> int:
        return self.values.shape[0]

    @property
    def w(self) -> int:
        return self.values.shape[1]

    @property
    def num_depths(self) -> int:
        return self.values.shape[2]

    def slice(self, index: int) -> np.ndarray:
        return self.values[:, :, index]


# ============================================================================
# Attention
# ============================================================================

@dataclass
class DepthwiseSeparableWeights:
    """Depthwise 3x3 kernels (c, 3, 3) followed by a pointwise c x c matrix."""
    depthwise: np.ndarray
    pointwise: np.ndarray

    @classmethod
    def identity(cls, channels: int) -> "DepthwiseSeparableWeights":
        dw = np.zeros((channels, 3, 3))
        dw[:, 1, 1] = 1.0
        return cls(dw, np.eye(channels))


@dataclass
class ProjectionWeights:
    """Query/key/value projections and the two injection-stage convolutions."""
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    dsc_x2: DepthwiseSeparableWeights
    dsc_x4: DepthwiseSeparableWeights

    def __post_init__(self):
        c, dk = self.wq.shape
        for name in ("wk", "wv"):
            if getattr(self, name).shape != (c, dk):
                raise ShapeMismatch(f"{name} must have shape {(c, dk)}",
                                    actual=list(getattr(self, name).shape))
        for stage in (self.dsc_x2, self.dsc_x4):
            if stage.depthwise.shape != (dk, 3, 3) or stage.pointwise.shape != (dk, dk):
                raise ShapeMismatch("depthwise-separable weights must match the fused width",
                                    channels=dk)
        for name, arr in self.tensors().items():
            if not np.all(np.isfinite(arr)):
                raise InvalidConfig(f"{name} contains non-finite values")

    @property
    def channels(self) -> int:
        return self.wq.shape[0]

    @property
    def dk(self) -> int:
        return self.wq.shape[1]

    @classmethod
    def random(cls, channels: int, dk: Optional[int] = None, seed: int = 0) -> "ProjectionWeights":
        """Deterministic pseudo-random weights (no training in this library)."""
        dk = dk or channels
        rng = np.random.default_rng(seed)
        scale = 1.0 / np.sqrt(channels)

        def dsc() -> DepthwiseSeparableWeights:
            return DepthwiseSeparableWeights(
                depthwise=rng.normal(0.0, 1.0 / 3.0, (dk, 3, 3)),
                pointwise=rng.normal(0.0, 1.0 / np.sqrt(dk), (dk, dk)),
            )

        return cls(
            wq=rng.normal(0.0, scale, (channels, dk)),
            wk=rng.normal(0.0, scale, (channels, dk)),
            wv=rng.normal(0.0, scale, (channels, dk)),
            dsc_x2=dsc(),
            dsc_x4=dsc(),
        )

    def tensors(self) -> Dict[str, np.ndarray]:
        return {
            "wq": self.wq, "wk": self.wk, "wv": self.wv,
            "dsc_x2.depthwise": self.dsc_x2.depthwise,
            "dsc_x2.pointwise": self.dsc_x2.pointwise,
            "dsc_x4.depthwise": self.dsc_x4.depthwise,
            "dsc_x4.pointwise": self.dsc_x4.pointwise,
        }

    @classmethod
    def from_tensors(cls, tensors: Dict[str, np.ndarray]) -> "ProjectionWeights":
        return cls(
            wq=tensors["wq"], wk=tensors["wk"], wv=tensors["wv"],
            dsc_x2=DepthwiseSeparableWeights(tensors["dsc_x2.depthwise"],
                                             tensors["dsc_x2.pointwise"]),
            dsc_x4=DepthwiseSeparableWeights(tensors["dsc_x4.depthwise"],
                                             tensors["dsc_x4.pointwise"]),
        )


@dataclass
class AttentionMaps:
    """Intermediate matrices of one epipolar attention pass (rows: target pixels)."""
    scores: np.ndarray       # attn_g
    modulation: np.ndarray   # Norm(exp(-d))
    combined: np.ndarray     # attn_comb
    gate: np.ndarray         # sigmoid(attn_comb) or attn_comb


# ============================================================================
# View selection / metrics
# ============================================================================

@dataclass(frozen=True)
class OverlapScore:
    """Reference-view overlap score of one input view.

    ``dist`` is the distance the score was computed from (divided by the
    largest candidate distance when normalization is on); ``raw_dist`` is
    the unscaled baseline.
    """
    view_index: int
    dist: float
    angle: float
    score: float
    raw_dist: float


@dataclass(frozen=True)
class LossBreakdown:
    """MSE + lambda * perceptual, with the perceptual term's provenance."""
    mse: float
    perceptual: float
    weight: float
    total: float
    views: int = 1
    perceptual_placeholder: bool = False


# ============================================================================
# Scenes
# ============================================================================

@dataclass(frozen=True)
class PoseRecord:
    """One pose-file line, kept in its on-disk (normalized) form."""
    timestamp: int
    fx: float
    fy: float
    cx: float
    cy: float
    extrinsic: Tuple[float, ...]   # 12 row-major entries of [R|T]
    unused: Tuple[float, float] = (0.0, 0.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.extrinsic, dtype=np.float64).reshape(3, 4)

    def intrinsics(self, width: int, height: int) -> CameraIntrinsics:
        return CameraIntrinsics(
            fx=self.fx * width, fy=self.fy * height,
            cx=self.cx * width, cy=self.cy * height,
            width=width, height=height,
        )

    def extrinsics(self) -> CameraExtrinsics:
        """World-to-camera extrinsics; near-rigid rotations are snapped onto SO(3)."""
        m = self.matrix
        rotation = m[:, :3]
        try:
            check_rotation(rotation)
        except NonRigidRotation:
            rotation = nearest_rotation(rotation)
        return CameraExtrinsics(rotation=rotation, translation=m[:, 3])

    def camera_view(self, width: int, height: int, near: float, far: float) -> CameraView:
        return CameraView(self.intrinsics(width, height), self.extrinsics(), near, far)


@dataclass
class SceneView:
    """One view of a scene: image file, pose record and resolved camera."""
    image_path: Path
    pose: PoseRecord
    camera: CameraView

    @property
    def timestamp(self) -> int:
        return self.pose.timestamp


@dataclass
class SceneManifest:
    """Ordered views with designated input and target indices."""
    scene_id: str
    root: Path
    views: List[SceneView]
    input_indices: Tuple[int, ...]
    target_indices: Tuple[int, ...]
    image_width: int
    image_height: int
    near: float
    far: float
    pose_file: str = "poses.txt"
    header: str = ""
    primitives_path: Optional[Path] = None

    @property
    def input_views(self) -> List[CameraView]:
        return [self.views[i].camera for i in self.input_indices]


@dataclass
class CuratedPair:
    """Training pair: a rendered target, its ground truth and its maximum-overlap reference."""
    target_index: int
    reference_index: int
    score: OverlapScore
    rendered_path: Path
    ground_truth_path: Path
    reference_path: Path
    target_pose: PoseRecord
    reference_pose: PoseRecord


@dataclass
class CurationResult:
    """All pairs curated from one scene."""
    scene_id: str
    pairs: List[CuratedPair] = field(default_factory=list)
    available_targets: int = 0
    below_range: bool = False
