"""Unit tests for two-view geometry: centers, fundamental matrices, distance maps."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_look_at_view, view_at
from prosplat.application.services.geometry_service import GeometryService
from prosplat.domain.enums import FMatrixForm
from prosplat.domain.exceptions import (
    DegenerateBaseline,
    DegenerateLine,
    InvalidCamera,
    NonRigidRotation,
)
from prosplat.domain.value_objects import CameraExtrinsics, CameraIntrinsics, CameraView


# ╔══════════════════════════════════════════════════════════════╗
# ║  Camera value objects                                        ║
# ╚══════════════════════════════════════════════════════════════╝

class TestCameraValueObjects:

    def test_camera_center_matches_matrix_inverse(self, rng):
        for _ in range(20):
            view = random_look_at_view(rng)
            inverse = np.linalg.inv(view.extrinsics.matrix)
            np.testing.assert_allclose(GeometryService.camera_center(view.extrinsics),
                                       inverse[:3, 3], atol=1e-12)

    def test_non_rigid_rotation_rejected(self):
        with pytest.raises(NonRigidRotation):
            CameraExtrinsics(rotation=np.diag([1.0, 1.0, -1.0]), translation=np.zeros(3))
        with pytest.raises(NonRigidRotation):
            CameraExtrinsics(rotation=2.0 * np.eye(3), translation=np.zeros(3))

    def test_invalid_intrinsics(self):
        with pytest.raises(InvalidCamera):
            CameraIntrinsics(fx=0.0, fy=1.0, cx=1.0, cy=1.0, width=4, height=4)
        with pytest.raises(InvalidCamera):
            CameraIntrinsics(fx=1.0, fy=1.0, cx=4.0, cy=1.0, width=4, height=4)

    def test_invalid_depth_bounds(self):
        k = CameraIntrinsics(fx=10.0, fy=10.0, cx=2.0, cy=2.0, width=4, height=4)
        with pytest.raises(InvalidCamera):
            CameraView(k, CameraExtrinsics.identity(), near=2.0, far=1.0)

    def test_scaled_intrinsics(self):
        k = CameraIntrinsics(fx=57.6, fy=57.6, cx=32.0, cy=24.0, width=64, height=48)
        small = k.scaled(8, 6)
        assert small.fx == pytest.approx(7.2)
        assert small.cx == pytest.approx(4.0)
        assert small.cy == pytest.approx(3.0)
        np.testing.assert_allclose(small.matrix @ small.inverse, np.eye(3), atol=1e-12)

    def test_look_at_points_camera_at_target(self):
        eye = np.array([1.0, -2.0, -4.0])
        ext = GeometryService.look_at(eye, np.zeros(3))
        cam = ext.transform(np.zeros((1, 3)))[0]
        assert cam[0] == pytest.approx(0.0, abs=1e-12)
        assert cam[1] == pytest.approx(0.0, abs=1e-12)
        assert cam[2] == pytest.approx(np.linalg.norm(eye))


# ╔══════════════════════════════════════════════════════════════╗
# ║  Fundamental matrix                                          ║
# ╚══════════════════════════════════════════════════════════════╝

class TestFundamentalMatrix:

    def test_epipolar_constraint_on_synthetic_correspondences(self, rng):
        worst = 0.0
        for _ in range(100):
            tgt, ref = random_look_at_view(rng), random_look_at_view(rng)
            f = GeometryService.fundamental_matrix(tgt, ref)
            points = rng.uniform(-0.5, 0.5, (10, 3))
            px_tgt, _ = GeometryService.project_points(tgt, points)
            px_ref, _ = GeometryService.project_points(ref, points)
            x_tgt = np.hstack([px_tgt, np.ones((10, 1))])
            x_ref = np.hstack([px_ref, np.ones((10, 1))])
            residual = np.abs(np.einsum("ni,ij,nj->n", x_ref, f, x_tgt))
            worst = max(worst, float(residual.max()))
        assert worst < 1e-9

    def test_unit_frobenius_and_rank_two(self, rng):
        for _ in range(20):
            f = GeometryService.fundamental_matrix(random_look_at_view(rng),
                                                   random_look_at_view(rng))
            assert np.linalg.norm(f) == pytest.approx(1.0, abs=1e-12)
            sv = np.linalg.svd(f, compute_uv=False)
            assert sv[2] < 1e-9 * sv[0]

    def test_pure_x_translation(self):
        tgt = view_at([0.0, 0.0, 0.0])
        ref = view_at([1.0, 0.0, 0.0])
        f = GeometryService.fundamental_matrix(tgt, ref)
        # Horizontal baseline: epipolar lines are the image rows.
        line = GeometryService.epipolar_lines(f, np.array([[10.5, 7.5, 1.0]]))[0]
        assert line[0] == pytest.approx(0.0, abs=1e-12)
        assert -line[2] / line[1] == pytest.approx(7.5)

    def test_shared_center_is_degenerate(self):
        view = view_at([0.3, 0.1, -1.0])
        with pytest.raises(DegenerateBaseline):
            GeometryService.fundamental_matrix(view, view)

    def test_literal_form_is_normalized_and_differs(self, rng):
        tgt, ref = random_look_at_view(rng), random_look_at_view(rng)
        literal = GeometryService.fundamental_matrix(tgt, ref, FMatrixForm.LITERAL)
        consistent = GeometryService.fundamental_matrix(tgt, ref)
        assert np.linalg.norm(literal) == pytest.approx(1.0)
        assert not np.allclose(np.abs(literal), np.abs(consistent))

    def test_relative_pose_composes_extrinsics(self, rng):
        tgt, ref = random_look_at_view(rng), random_look_at_view(rng)
        r_rel, t_rel = GeometryService.relative_pose(tgt, ref)
        composed = ref.extrinsics.matrix @ np.linalg.inv(tgt.extrinsics.matrix)
        np.testing.assert_allclose(r_rel, composed[:3, :3], atol=1e-12)
        np.testing.assert_allclose(t_rel, composed[:3, 3], atol=1e-12)


# ╔══════════════════════════════════════════════════════════════╗
# ║  Epipolar distance map                                       ║
# ╚══════════════════════════════════════════════════════════════╝

class TestEpipolarDistanceMap:

    def test_matches_full_resolution_distances_rescaled(self, rng):
        tgt, ref = random_look_at_view(rng), random_look_at_view(rng)
        tgt_grid, ref_grid = (6, 8), (12, 16)
        dmap = GeometryService().epipolar_distance_map(tgt, ref, tgt_grid, ref_grid)

        f = GeometryService.fundamental_matrix(tgt, ref)
        scale = ref.width / ref_grid[1]
        tgt_px = GeometryService.grid_pixel_coords(tgt_grid, tgt.width, tgt.height)
        ref_px = GeometryService.grid_pixel_coords(ref_grid, ref.width, ref.height)
        for p in range(0, tgt_px.shape[0], 7):
            a, b, c = f @ tgt_px[p]
            full = np.abs(ref_px @ np.array([a, b, c])) / np.hypot(a, b)
            np.testing.assert_allclose(dmap.distances[p], full / scale, atol=1e-6)

    def test_corresponding_pixel_lies_on_line(self, rng):
        tgt, ref = random_look_at_view(rng), random_look_at_view(rng)
        point = np.array([[0.1, -0.2, 0.05]])
        px_tgt, _ = GeometryService.project_points(tgt, point)
        px_ref, _ = GeometryService.project_points(ref, point)
        f = GeometryService.fundamental_matrix(tgt, ref)
        a, b, c = f @ np.array([*px_tgt[0], 1.0])
        distance = abs(a * px_ref[0, 0] + b * px_ref[0, 1] + c) / np.hypot(a, b)
        assert distance < 1e-9

    def test_distances_are_nonnegative(self, rng):
        dmap = GeometryService().epipolar_distance_map(
            random_look_at_view(rng), random_look_at_view(rng), (4, 5), (3, 4)
        )
        assert dmap.distances.shape == (20, 12)
        assert np.all(dmap.distances >= 0.0)
        assert not dmap.has_degenerate_rows

    def _forward_pair(self):
        # Forward baseline: the epipole sits on the principal point (center cell of a 3x3 grid).
        tgt = view_at([0.0, 0.0, 0.0], width=30, height=30)
        ref = view_at([0.0, 0.0, 1.0], width=30, height=30)
        return tgt, ref

    def test_epipole_row_gets_max_distance_sentinel(self):
        tgt, ref = self._forward_pair()
        dmap = GeometryService().epipolar_distance_map(tgt, ref, (3, 3), (3, 3))
        assert dmap.degenerate_rows.tolist() == [False] * 4 + [True] + [False] * 4
        others = np.delete(dmap.distances, 4, axis=0)
        np.testing.assert_array_equal(dmap.distances[4], np.full(9, others.max()))
        assert dmap.sentinel == pytest.approx(others.max())

    def test_explicit_sentinel(self):
        tgt, ref = self._forward_pair()
        dmap = GeometryService(sentinel=1e6).epipolar_distance_map(tgt, ref, (3, 3), (3, 3))
        np.testing.assert_array_equal(dmap.distances[4], np.full(9, 1e6))

    def test_strict_mode_raises(self):
        tgt, ref = self._forward_pair()
        with pytest.raises(DegenerateLine) as exc:
            GeometryService().epipolar_distance_map(tgt, ref, (3, 3), (3, 3), strict=True)
        assert exc.value.details["rows"] == [4]

    def test_worker_count_does_not_change_result(self, rng):
        tgt, ref = random_look_at_view(rng), random_look_at_view(rng)
        one = GeometryService(workers=1).epipolar_distance_map(tgt, ref, (9, 7), (5, 6))
        many = GeometryService(workers=4).epipolar_distance_map(tgt, ref, (9, 7), (5, 6))
        np.testing.assert_array_equal(one.distances, many.distances)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2 ** 32 - 1))
def test_row_image_is_reshaped_row(seed):
    rng = np.random.default_rng(seed)
    dmap = GeometryService().epipolar_distance_map(
        random_look_at_view(rng), random_look_at_view(rng), (2, 3), (4, 5)
    )
    np.testing.assert_array_equal(dmap.row_image(5), dmap.distances[5].reshape(4, 5))
