"""Value objects for prosplat: cameras, Gaussian primitives, attention config.

All value objects are frozen and validate their invariants on construction,
so downstream services can assume well-formed inputs.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .enums import FusionMode, NormScope
from .exceptions import InvalidCamera, InvalidConfig, InvalidPrimitive, NonRigidRotation

ROTATION_TOLERANCE = 1e-9
QUATERNION_TOLERANCE = 1e-9
SH_COEFFS_PER_DEGREE = {1: 0, 4: 1, 9: 2, 16: 3}


def _frozen_array(values, shape: tuple, name: str, error=InvalidCamera) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.shape != shape:
        raise error(f"{name} must have shape {shape}, got {arr.shape}", field=name)
    if not np.all(np.isfinite(arr)):
        raise error(f"{name} must be finite", field=name)
    arr.setflags(write=False)
    return arr


def check_rotation(rotation: np.ndarray, tolerance: float = ROTATION_TOLERANCE) -> None:
    """Raise NonRigidRotation unless R^T R = I and det(R) = +1 within tolerance."""
    ortho_err = float(np.max(np.abs(rotation.T @ rotation - np.eye(3))))
    det = float(np.linalg.det(rotation))
    if ortho_err > tolerance or abs(det - 1.0) > tolerance:
        raise NonRigidRotation(
            "rotation is not a proper rigid rotation",
            orthogonality_error=ortho_err,
            determinant=det,
            tolerance=tolerance,
        )


def nearest_rotation(matrix: np.ndarray) -> np.ndarray:
    """Project a near-orthonormal 3x3 matrix onto SO(3) (polar decomposition)."""
    u, _, vt = np.linalg.svd(matrix)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] *= -1.0
        r = u @ vt
    return r


# ============================================================================
# Cameras
# ============================================================================

@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels."""
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise InvalidCamera("focal lengths must be positive", fx=self.fx, fy=self.fy)
        if self.width < 1 or self.height < 1:
            raise InvalidCamera("image size must be positive",
                                width=self.width, height=self.height)
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise InvalidCamera("principal point outside the image",
                                cx=self.cx, cy=self.cy,
                                width=self.width, height=self.height)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([
            [self.fx, 0.0, self.cx],
            [0.0, self.fy, self.cy],
            [0.0, 0.0, 1.0],
        ])

    @property
    def inverse(self) -> np.ndarray:
        # Closed form; K is upper triangular with unit corner.
        return np.array([
            [1.0 / self.fx, 0.0, -self.cx / self.fx],
            [0.0, 1.0 / self.fy, -self.cy / self.fy],
            [0.0, 0.0, 1.0],
        ])

    def scaled(self, width: int, height: int) -> "CameraIntrinsics":
        """Intrinsics for the same camera resampled to another image size."""
        sx = width / self.width
        sy = height / self.height
        return CameraIntrinsics(
            fx=self.fx * sx, fy=self.fy * sy,
            cx=self.cx * sx, cy=self.cy * sy,
            width=width, height=height,
        )


@dataclass(frozen=True, eq=False)
class CameraExtrinsics:
    """World-to-camera rigid transform: x_cam = R x_world + T."""
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = _frozen_array(self.rotation, (3, 3), "rotation")
        trans = _frozen_array(self.translation, (3,), "translation")
        check_rotation(rot)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    @classmethod
    def identity(cls) -> "CameraExtrinsics":
        return cls(rotation=np.eye(3), translation=np.zeros(3))

    @property
    def matrix(self) -> np.ndarray:
        """4x4 homogeneous world-to-camera matrix."""
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def transform(self, points: np.ndarray) -> np.ndarray:
        """World points (N, 3) -> camera points (N, 3)."""
        return np.asarray(points, dtype=np.float64) @ self.rotation.T + self.translation

    def __eq__(self, other) -> bool:
        if not isinstance(other, CameraExtrinsics):
            return NotImplemented
        return (np.array_equal(self.rotation, other.rotation)
                and np.array_equal(self.translation, other.translation))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CameraView:
    """Intrinsics + extrinsics + depth bounds for one view."""
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics
    near: float = 0.1
    far: float = 100.0

    def __post_init__(self):
        if not (0 < self.near < self.far):
            raise InvalidCamera("depth bounds must satisfy 0 < near < far",
                                near=self.near, far=self.far)

    @property
    def width(self) -> int:
        return self.intrinsics.width

    @property
    def height(self) -> int:
        return self.intrinsics.height

    @property
    def center(self) -> np.ndarray:
        return -self.extrinsics.rotation.T @ self.extrinsics.translation

    def with_extrinsics(self, extrinsics: CameraExtrinsics) -> "CameraView":
        return CameraView(self.intrinsics, extrinsics, self.near, self.far)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CameraView):
            return NotImplemented
        return (self.intrinsics == other.intrinsics
                and self.extrinsics == other.extrinsics
                and self.near == other.near and self.far == other.far)

    __hash__ = None


# ============================================================================
# Gaussian primitives
# ============================================================================

@dataclass(frozen=True, eq=False)
class GaussianPrimitive:
    """One 3D Gaussian: mean, SH color, rotation quaternion (w, x, y, z), scale, opacity."""
    mean: np.ndarray
    sh: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    scale: np.ndarray = field(default_factory=lambda: np.array([0.1, 0.1, 0.1]))
    opacity: float = 1.0

    def __post_init__(self):
        mean = _frozen_array(self.mean, (3,), "mean", InvalidPrimitive)
        sh = np.array(self.sh, dtype=np.float64)
        if sh.size % 3 == 0:
            sh = sh.reshape(-1, 3)
        if sh.ndim != 2 or sh.shape[0] not in SH_COEFFS_PER_DEGREE:
            raise InvalidPrimitive(
                "sh must hold 3*(deg+1)^2 coefficients with deg in 0..3",
                coefficients=int(sh.size),
            )
        sh = _frozen_array(sh, sh.shape, "sh", InvalidPrimitive)
        q = _frozen_array(self.rotation, (4,), "rotation", InvalidPrimitive)
        if abs(float(np.linalg.norm(q)) - 1.0) > QUATERNION_TOLERANCE:
            raise InvalidPrimitive("rotation quaternion must be unit length",
                                   norm=float(np.linalg.norm(q)))
        s = _frozen_array(self.scale, (3,), "scale", InvalidPrimitive)
        if np.any(s <= 0):
            raise InvalidPrimitive("scales must be positive", scale=s.tolist())
        if not (0.0 <= self.opacity <= 1.0):
            raise InvalidPrimitive("opacity must lie in [0, 1]", opacity=self.opacity)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "sh", sh)
        object.__setattr__(self, "rotation", q)
        object.__setattr__(self, "scale", s)
        object.__setattr__(self, "opacity", float(self.opacity))

    @property
    def sh_degree(self) -> int:
        return SH_COEFFS_PER_DEGREE[self.sh.shape[0]]

    @property
    def rotation_matrix(self) -> np.ndarray:
        w, x, y, z = self.rotation
        return Rotation.from_quat([x, y, z, w]).as_matrix()

    @property
    def covariance(self) -> np.ndarray:
        """Sigma = R S S^T R^T."""
        r = self.rotation_matrix
        m = r * self.scale  # R @ diag(s)
        return m @ m.T


@dataclass(frozen=True, eq=False)
class SplatProjection:
    """A primitive projected into one view."""
    mean2d: np.ndarray
    cov2d: np.ndarray
    depth: float
    color: np.ndarray

    @property
    def conic(self) -> np.ndarray:
        """Inverse of the 2D covariance."""
        return np.linalg.inv(self.cov2d)

    @property
    def radius(self) -> float:
        """Pixel radius covering three standard deviations of the major axis."""
        return 3.0 * float(np.sqrt(np.max(np.linalg.eigvalsh(self.cov2d))))


# ============================================================================
# Attention configuration
# ============================================================================

LATENT_SCALES = (1, 2, 4, 8)


@dataclass(frozen=True)
class AttentionConfig:
    """Epipolar attention forward-pass switches."""
    dk: int = 8
    apply_softmax: bool = True
    apply_sigmoid: bool = True
    latent_scale: int = 8
    norm_scope: NormScope = NormScope.ROW
    fusion: FusionMode = FusionMode.EPIPOLAR

    def __post_init__(self):
        if self.dk < 1:
            raise InvalidConfig("dk must be >= 1", dk=self.dk)
        if self.latent_scale not in LATENT_SCALES:
            raise InvalidConfig("latent_scale must be one of 1, 2, 4, 8",
                                latent_scale=self.latent_scale)
