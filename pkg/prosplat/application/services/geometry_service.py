"""
Two-view geometry service: camera centers, relative poses, fundamental
matrices, epipolar lines and point-to-line distance maps.

Conventions
-----------
- Extrinsics are world-to-camera: x_cam = R x_world + T.
- Pixel (row i, col j) covers [j, j+1) x [i, i+1); its center is (j+0.5, i+0.5).
- A grid of size (h, w) laid over a W x H image maps cell (i, j) to the
  full-resolution pixel ((j+0.5) W/w, (i+0.5) H/h).
"""

from __future__ import annotations

import logging
from typing import Optional, Tuple

import numpy as np

from ...domain.entities import EpipolarDistanceMap
from ...domain.enums import FMatrixForm
from ...domain.exceptions import DegenerateBaseline, DegenerateLine, ShapeMismatch
from ...domain.value_objects import CameraExtrinsics, CameraView
from .worker_pool import WorkerPool

logger = logging.getLogger(__name__)

BASELINE_EPS = 1e-12
LINE_EPS = 1e-18


class GeometryService:
    """Pure two-view geometry; every method is safe to call concurrently."""

    def __init__(
        self,
        form: FMatrixForm = FMatrixForm.CONSISTENT,
        sentinel: Optional[float] = None,
        workers: Optional[int] = None,
    ):
        self.form = form
        self.sentinel = sentinel
        self.pool = WorkerPool(workers)

    # ------------------------------------------------------------------
    # Camera basics
    # ------------------------------------------------------------------

    @staticmethod
    def camera_center(ext: CameraExtrinsics) -> np.ndarray:
        """C = -R^T T, the world point that maps to the camera origin."""
        return -ext.rotation.T @ ext.translation

    @staticmethod
    def skew(t: np.ndarray) -> np.ndarray:
        """Cross-product matrix [t]x."""
        tx, ty, tz = t
        return np.array([
            [0.0, -tz, ty],
            [tz, 0.0, -tx],
            [-ty, tx, 0.0],
        ])

    @staticmethod
    def relative_pose(tgt: CameraView, ref: CameraView) -> Tuple[np.ndarray, np.ndarray]:
        """Motion taking target-camera points to reference-camera points (ref o tgt^-1)."""
        r_tgt, t_tgt = tgt.extrinsics.rotation, tgt.extrinsics.translation
        r_ref, t_ref = ref.extrinsics.rotation, ref.extrinsics.translation
        r_rel = r_ref @ r_tgt.T
        return r_rel, t_ref - r_rel @ t_tgt

    @staticmethod
    def project_points(view: CameraView, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """World points (N, 3) -> pixel coordinates (N, 2) and camera depths (N,)."""
        cam = view.extrinsics.transform(np.asarray(points, dtype=np.float64).reshape(-1, 3))
        k = view.intrinsics
        z = cam[:, 2]
        with np.errstate(divide="ignore", invalid="ignore"):
            px = np.stack([k.fx * cam[:, 0] / z + k.cx, k.fy * cam[:, 1] / z + k.cy], axis=1)
        return px, z

    @staticmethod
    def grid_pixel_coords(grid: Tuple[int, int], width: int, height: int) -> np.ndarray:
        """Homogeneous full-resolution pixel centers of a grid, row-major (h*w, 3)."""
        h, w = grid
        if h < 1 or w < 1:
            raise ShapeMismatch("grid must be non-empty", grid=[h, w])
        xs = (np.arange(w) + 0.5) * (width / w)
        ys = (np.arange(h) + 0.5) * (height / h)
        gx, gy = np.meshgrid(xs, ys)
        return np.stack([gx.ravel(), gy.ravel(), np.ones(h * w)], axis=1)

    @staticmethod
    def look_at(
        eye: np.ndarray,
        target: np.ndarray,
        up: Tuple[float, float, float] = (0.0, -1.0, 0.0),
    ) -> CameraExtrinsics:
        """World-to-camera extrinsics of a camera at ``eye`` looking at ``target``.

        Camera axes follow the x-right, y-down, z-forward convention.
        """
        eye = np.asarray(eye, dtype=np.float64)
        forward = np.asarray(target, dtype=np.float64) - eye
        forward /= np.linalg.norm(forward)
        right = np.cross(forward, np.asarray(up, dtype=np.float64))
        right /= np.linalg.norm(right)
        down = np.cross(forward, right)
        rotation = np.stack([right, down, forward])
        return CameraExtrinsics(rotation=rotation, translation=-rotation @ eye)

    # ------------------------------------------------------------------
    # Fundamental matrix
    # ------------------------------------------------------------------

    @classmethod
    def fundamental_matrix(
        cls,
        tgt: CameraView,
        ref: CameraView,
        form: FMatrixForm = FMatrixForm.CONSISTENT,
    ) -> np.ndarray:
        """F with x_ref^T F x_tgt = 0, scaled to unit Frobenius norm.

        ``FMatrixForm.LITERAL`` evaluates K_ref^-1 [t]x R_ref R_tgt^T K_tgt^-1 with
        t = T_ref - R_tgt^T T_tgt; it does not satisfy the epipolar constraint in
        general and exists only for comparison.
        """
        r_rel, t_rel = cls.relative_pose(tgt, ref)
        baseline = float(np.linalg.norm(t_rel))
        if baseline <= BASELINE_EPS:
            raise DegenerateBaseline("views share a camera center", baseline=baseline)

        k_tgt_inv = tgt.intrinsics.inverse
        if form is FMatrixForm.LITERAL:
            r_tgt, t_tgt = tgt.extrinsics.rotation, tgt.extrinsics.translation
            r_ref, t_ref = ref.extrinsics.rotation, ref.extrinsics.translation
            t_lit = t_ref - r_tgt.T @ t_tgt
            f = ref.intrinsics.inverse @ cls.skew(t_lit) @ r_ref @ r_tgt.T @ k_tgt_inv
        else:
            f = ref.intrinsics.inverse.T @ cls.skew(t_rel) @ r_rel @ k_tgt_inv

        norm = float(np.linalg.norm(f))
        if norm <= BASELINE_EPS:
            raise DegenerateBaseline("fundamental matrix vanishes", form=form.value)
        return f / norm

    @staticmethod
    def epipolar_lines(f: np.ndarray, coords: np.ndarray) -> np.ndarray:
        """Lines [a, b, c] (N, 3) in the reference image for homogeneous target coords."""
        return coords @ f.T

    # ------------------------------------------------------------------
    # Distance maps
    # ------------------------------------------------------------------

    def epipolar_distance_map(
        self,
        tgt: CameraView,
        ref: CameraView,
        tgt_grid: Tuple[int, int],
        ref_grid: Tuple[int, int],
        strict: bool = False,
    ) -> EpipolarDistanceMap:
        """Distances from every reference grid cell to every target cell's epipolar line.

        Distances are in reference-grid pixels. A target cell whose line
        degenerates (it coincides with the epipole) raises ``DegenerateLine``
        when ``strict``; otherwise its row is filled with the sentinel.
        """
        f = self.fundamental_matrix(tgt, ref, self.form)
        tgt_coords = self.grid_pixel_coords(tgt_grid, tgt.width, tgt.height)
        ref_h, ref_w = ref_grid
        if ref_h < 1 or ref_w < 1:
            raise ShapeMismatch("grid must be non-empty", grid=[ref_h, ref_w])

        lines = self.epipolar_lines(f, tgt_coords)
        degenerate = lines[:, 0] ** 2 + lines[:, 1] ** 2 < LINE_EPS
        if strict and np.any(degenerate):
            raise DegenerateLine("target pixel coincides with the epipole",
                                 rows=np.flatnonzero(degenerate).tolist())

        # Express lines in reference-grid coordinates: x = u * sx, y = v * sy.
        sx = ref.width / ref_w
        sy = ref.height / ref_h
        grid_lines = lines * np.array([sx, sy, 1.0])
        u = np.tile(np.arange(ref_w) + 0.5, ref_h)
        v = np.repeat(np.arange(ref_h) + 0.5, ref_w)

        def rows(start: int, stop: int) -> np.ndarray:
            a = grid_lines[start:stop, 0:1]
            b = grid_lines[start:stop, 1:2]
            c = grid_lines[start:stop, 2:3]
            norm = np.sqrt(a ** 2 + b ** 2)
            norm[degenerate[start:stop]] = 1.0
            return np.abs(a * u + b * v + c) / norm

        distances = np.concatenate(
            self.pool.map_ranges(rows, len(tgt_coords)), axis=0
        )

        sentinel = 0.0
        if np.any(degenerate):
            if self.sentinel is not None:
                sentinel = float(self.sentinel)
            elif np.any(~degenerate):
                sentinel = float(np.max(distances[~degenerate]))
            distances[degenerate] = sentinel
            logger.warning(
                "Epipolar map: %d of %d target cells coincide with the epipole; "
                "filled with sentinel %.4g",
                int(degenerate.sum()), len(degenerate), sentinel,
            )

        logger.debug("Epipolar map %s -> %s computed", tuple(tgt_grid), tuple(ref_grid))
        return EpipolarDistanceMap(
            target_dims=(int(tgt_grid[0]), int(tgt_grid[1])),
            ref_dims=(int(ref_h), int(ref_w)),
            distances=distances,
            degenerate_rows=degenerate,
            sentinel=sentinel,
        )
