import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camprior.errors import DegenerateSamples, InvalidFov, TooFewRows
from camprior.ground import (
    DepthMap,
    GroundPlane,
    fit_ground_plane,
    fit_plane,
    ground_depth_at,
    ground_depth_map,
    ground_gradient_map,
    ground_sample_points,
    initial_ground_depth,
)
from camprior.rig import CameraIntrinsics

from conftest import extrinsics_strategy, make_extrinsics


def intr(fu, fv, cu, cv, w, h):
    return CameraIntrinsics(fu=fu, fv=fv, cu=cu, cv=cv, width=w, height=h)


def ego_ray_ground_depth(intr, extr, u, v):
    """Independent oracle: intersect the pixel ray with the ego plane z=0.

    The camera-frame depth of the hit equals the ray parameter because the
    ray direction has unit camera-frame z. Returns inf for rays that never
    reach the ground in front of the camera.
    """
    x = (u - intr.cu) / intr.fu
    y = (v - intr.cv) / intr.fv
    d_cam = np.stack(np.broadcast_arrays(x, y, np.ones_like(x + y)), axis=-1)
    d_ego = d_cam @ extr.rotation.T
    tz = extr.translation[2]
    dz = d_ego[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = -tz / dz
    return np.where((dz < 0) & (s > 0), s, np.inf)


class TestFitPlane:
    def test_horizontal_camera_height_1_5(self):
        plane = fit_ground_plane(make_extrinsics(t=(0.0, 0.0, 1.5)))
        np.testing.assert_allclose([plane.a, plane.b, plane.c, plane.d], [0, 1, 0, -1.5], atol=1e-9)

    def test_yawed_camera_same_plane(self):
        plane = fit_ground_plane(make_extrinsics(yaw_deg=110.0, t=(1.0, 0.5, 1.55)))
        np.testing.assert_allclose(
            [plane.a, plane.b, plane.c, plane.d], [0, 1, 0, -1.55], atol=1e-9
        )

    def test_straight_down_camera(self):
        # positive pitch about ego y (left) tips the forward camera downward
        plane = fit_ground_plane(make_extrinsics(pitch_deg=90.0, t=(0.0, 0.0, 2.0)))
        np.testing.assert_allclose([plane.a, plane.b, plane.c, plane.d], [0, 0, 1, -2.0], atol=1e-9)

    def test_collinear_samples_raise(self):
        pts = np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]])
        with pytest.raises(DegenerateSamples):
            fit_plane(pts)

    def test_too_few_samples(self):
        with pytest.raises(ValueError):
            ground_sample_points(2)

    @settings(max_examples=50, deadline=None)
    @given(extr=extrinsics_strategy, count=st.integers(3, 40))
    def test_all_samples_on_fitted_plane(self, extr, count):
        plane = fit_ground_plane(extr, sample_count=count)
        pts_cam = extr.ego_to_cam(ground_sample_points(count))
        assert np.max(np.abs(plane.signed_distance(pts_cam))) < 1e-9

    @settings(max_examples=50, deadline=None)
    @given(extr=extrinsics_strategy)
    def test_camera_center_on_negative_side(self, extr):
        plane = fit_ground_plane(extr)
        assert plane.d <= 1e-12


class TestGroundDepthMap:
    def test_depth_three_meters_half_unit_below_horizon(self):
        plane = GroundPlane(0.0, 1.0, 0.0, -1.5)
        cam = intr(1000.0, 1000.0, 500.0, 500.0, 1000, 1001)
        gd = ground_depth_map(cam, plane, 1000, 1001)
        # row v = cv + 500 -> Y = 0.5 -> z = 1.5 / 0.5
        assert gd.values[1000, 500] == pytest.approx(3.0, abs=1e-12)
        assert gd.valid[1000, 500]

    def test_principal_row_is_horizon(self):
        plane = GroundPlane(0.0, 1.0, 0.0, -1.5)
        cam = intr(1000.0, 1000.0, 500.0, 500.0, 1000, 1000)
        gd = ground_depth_map(cam, plane, 1000, 1000, max_depth=100.0)
        assert not gd.valid[500, 500]
        assert gd.values[500, 500] == 100.0
        assert not gd.valid[100, 500]  # above horizon

    def test_algebraic_identity_depth_times_y(self):
        h_cam = 1.7
        plane = GroundPlane(0.0, 1.0, 0.0, -h_cam)
        cam = intr(800.0, 800.0, 512.0, 384.0, 1024, 768)
        gd = ground_depth_map(cam, plane, 1024, 768)
        v = np.arange(768, dtype=np.float64)
        y = (v - cam.cv) / cam.fv
        prod = gd.values * y[:, None]
        assert np.max(np.abs(prod[gd.valid] - h_cam)) < 1e-9

    def test_matches_ego_ray_oracle(self):
        extr = make_extrinsics(yaw_deg=-55.0, pitch_deg=2.0, roll_deg=-1.0, t=(1.55, -0.5, 1.5))
        cam = intr(1250.0, 1250.0, 800.0, 450.0, 1600, 900)
        plane = fit_ground_plane(extr)
        gd = ground_depth_map(cam, plane, 1600, 900, max_depth=500.0)
        uu, vv = np.meshgrid(np.arange(1600.0), np.arange(900.0), indexing="xy")
        oracle = ego_ray_ground_depth(cam, extr, uu, vv)
        both = gd.valid & np.isfinite(oracle)
        rel = np.abs(gd.values[both] - oracle[both]) / oracle[both]
        assert gd.valid.sum() > 100_000
        assert np.max(rel) < 1e-9

    def test_monotone_toward_horizon(self):
        plane = GroundPlane(0.0, 1.0, 0.0, -1.5)
        cam = intr(1000.0, 1000.0, 500.0, 400.0, 1000, 800)
        gd = ground_depth_map(cam, plane, 1000, 800)
        col = gd.values[:, 500]
        valid = gd.valid[:, 500]
        rows = np.nonzero(valid)[0]
        assert np.all(np.diff(col[rows]) < 0)  # deeper toward smaller v

    def test_depth_scales_linearly_with_height(self):
        cam = intr(1000.0, 1000.0, 500.0, 400.0, 1000, 800)
        g1 = ground_depth_map(cam, GroundPlane(0.0, 1.0, 0.0, -1.2), 1000, 800, max_depth=1e9)
        g2 = ground_depth_map(cam, GroundPlane(0.0, 1.0, 0.0, -2.4), 1000, 800, max_depth=1e9)
        both = g1.valid & g2.valid
        np.testing.assert_allclose(g2.values[both], 2.0 * g1.values[both], rtol=1e-12)


class TestInitialGroundDepth:
    def test_unit_at_90_degrees(self):
        assert initial_ground_depth(1.5, 90.0) == pytest.approx(1.5, abs=1e-12)

    def test_high_mounted_narrow_fov(self):
        assert initial_ground_depth(2.1, 35.0) == pytest.approx(6.660349084962747, abs=1e-12)

    def test_zero_fov_raises(self):
        with pytest.raises(InvalidFov):
            initial_ground_depth(1.5, 0.0)

    def test_nonpositive_height_raises(self):
        with pytest.raises(ValueError):
            initial_ground_depth(0.0, 60.0)

    def test_connects_to_ground_depth_at_image_bottom(self):
        from camprior.rig import vertical_fov

        h_cam = 1.5
        cam = intr(1250.0, 1250.0, 800.0, 450.0, 1600, 900)
        plane = fit_ground_plane(make_extrinsics(t=(0.0, 0.0, h_cam)))
        y_bottom = (cam.height - cam.cv) / cam.fv
        z_bottom = float(ground_depth_at(plane, 0.0, y_bottom))
        z_formula = initial_ground_depth(h_cam, vertical_fov(cam))
        assert abs(z_bottom - z_formula) / z_formula < 1e-6


class TestGradientMap:
    def test_unit_depth_difference_gives_log2(self):
        values = np.linspace(10.0, 3.0, 8)[:, None].repeat(5, axis=1)  # diff = 1 per row
        gd = DepthMap(values=values, valid=np.ones((8, 5), bool))
        gg = ground_gradient_map(gd)
        np.testing.assert_allclose(gg.values, math.log(2.0), atol=1e-12)

    def test_huge_difference_tends_to_zero(self):
        values = np.array([[1e12], [1.0]])
        gd = DepthMap(values=values, valid=np.ones((2, 1), bool))
        gg = ground_gradient_map(gd)
        assert 0 < gg.values[1, 0] < 1e-11

    def test_closed_form_on_analytic_plane(self):
        # rows at v - cv = 499 and 500 for a 1.5 m horizontal camera, fv=1000
        plane = GroundPlane(0.0, 1.0, 0.0, -1.5)
        cam = intr(1000.0, 1000.0, 500.0, 500.0, 1000, 1001)
        gd = ground_depth_map(cam, plane, 1000, 1001)
        gg = ground_gradient_map(gd)
        delta = 1.5 / 0.499 - 1.5 / 0.500
        expected = math.log(1.0 / delta + 1.0)
        assert expected == pytest.approx(5.119987831023637, abs=1e-12)
        assert gg.values[1000, 500] == pytest.approx(expected, abs=1e-9)

    def test_closed_form_full_map(self):
        plane = GroundPlane(0.0, 1.0, 0.0, -1.8)
        cam = intr(700.0, 700.0, 320.0, 240.0, 640, 480)
        gd = ground_depth_map(cam, plane, 640, 480)
        gg = ground_gradient_map(gd)
        v = np.arange(480, dtype=np.float64)
        y = (v - cam.cv) / cam.fv
        with np.errstate(divide="ignore"):
            z = np.where(y > 0, 1.8 / y, np.inf)
        for r in range(1, 480):
            if not (np.isfinite(z[r - 1]) and np.isfinite(z[r]) and z[r - 1] <= 100.0):
                continue
            delta = z[r - 1] - z[r]
            expected = math.log(1.0 / delta + 1.0)
            assert abs(gg.values[r, 100] - expected) < 1e-9

    def test_top_row_replicates_first_computed_row(self):
        values = np.linspace(9.0, 2.0, 6)[:, None].repeat(3, axis=1)
        gd = DepthMap(values=values, valid=np.ones((6, 3), bool))
        gg = ground_gradient_map(gd)
        np.testing.assert_array_equal(gg.values[0], gg.values[1])
        assert gg.height == gd.height

    def test_nonpositive_difference_marked_invalid(self):
        values = np.array([[1.0], [2.0], [1.5]])  # depth increases downward at row 1
        gd = DepthMap(values=values, valid=np.ones((3, 1), bool))
        gg = ground_gradient_map(gd)
        assert gg.values[1, 0] == 0.0
        assert not gg.valid[1, 0]
        assert gg.values[2, 0] > 0

    def test_single_row_raises(self):
        gd = DepthMap(values=np.ones((1, 4)), valid=np.ones((1, 4), bool))
        with pytest.raises(TooFewRows):
            ground_gradient_map(gd)
