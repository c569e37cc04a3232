import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from camprior.errors import ColorOutOfRange, EmptyInput, ShapeMismatch
from camprior.rig import CameraExtrinsics, CameraIntrinsics, preset_rig, project, unproject
from camprior.scene import (
    GaussianScene,
    append_points,
    from_rgbd,
    load_colored_points,
    load_ply,
    radius_schedule,
    save_ply,
)

from conftest import make_extrinsics


def intr(fu, fv, cu, cv, w, h):
    return CameraIntrinsics(fu=fu, fv=fv, cu=cu, cv=cv, width=w, height=h)


class TestRadiusSchedule:
    def test_foreground_constant(self):
        z = np.array([-5.0, 0.0, 3.0, 50.0])
        np.testing.assert_array_equal(radius_schedule(z, True), 0.0025)

    def test_background_endpoints(self):
        assert radius_schedule(np.float64(0.0), False) == pytest.approx(0.02, abs=1e-15)
        assert radius_schedule(np.float64(10.0), False) == pytest.approx(0.001, abs=1e-15)

    def test_background_midpoint(self):
        assert radius_schedule(np.float64(5.0), False) == pytest.approx(0.0105, abs=1e-15)

    def test_background_clamped_outside(self):
        assert radius_schedule(np.float64(-2.0), False) == pytest.approx(0.02, abs=1e-15)
        assert radius_schedule(np.float64(30.0), False) == pytest.approx(0.001, abs=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.floats(-5, 25), st.floats(-5, 25))
    def test_monotone_nonincreasing(self, z1, z2):
        lo, hi = sorted((z1, z2))
        assert radius_schedule(np.float64(hi), False) <= radius_schedule(np.float64(lo), False)


class TestFromRgbd:
    def test_two_by_two_constant_depth(self):
        cam = intr(10.0, 10.0, 1.0, 1.0, 2, 2)
        extr = make_extrinsics(t=(0.0, 0.0, 1.5))
        depth = np.full((2, 2), 5.0)
        rgb = np.zeros((2, 2, 3), np.uint8)
        rgb[..., 0] = 255
        scene = from_rgbd([(rgb, depth, (cam, extr))])
        assert len(scene) == 4
        expected = unproject(
            cam, extr, np.array([0.0, 1.0, 0.0, 1.0]), np.array([0.0, 0.0, 1.0, 1.0]),
            np.full(4, 5.0),
        )
        got = sorted(map(tuple, scene.centers))
        want = sorted(map(tuple, expected.astype(np.float32)))
        np.testing.assert_allclose(got, want, atol=1e-6)
        np.testing.assert_array_equal(scene.colors[:, 0], 1.0)
        assert not scene.foreground.any()

    def test_all_invalid_depth_raises(self):
        cam = intr(10.0, 10.0, 1.0, 1.0, 2, 2)
        views = [(np.zeros((2, 2, 3), np.uint8), np.zeros((2, 2)), (cam, make_extrinsics()))]
        with pytest.raises(EmptyInput):
            from_rgbd(views)

    def test_depth_band_filtering(self):
        cam = intr(10.0, 10.0, 1.0, 1.0, 2, 2)
        depth = np.array([[0.05, 5.0], [250.0, np.nan]])
        scene = from_rgbd([(np.zeros((2, 2, 3), np.uint8), depth, (cam, make_extrinsics()))])
        assert len(scene) == 1

    def test_overlapping_cameras_are_additive(self):
        cam = intr(10.0, 10.0, 2.0, 2.0, 4, 4)
        extr = make_extrinsics(t=(0.0, 0.0, 1.5))
        rgb = np.full((4, 4, 3), 128, np.uint8)
        depth = np.full((4, 4), 7.0)
        one = from_rgbd([(rgb, depth, (cam, extr))])
        two = from_rgbd([(rgb, depth, (cam, extr)), (rgb, depth, (cam, extr))])
        assert len(two) == 2 * len(one)

    def test_rgb_depth_shape_mismatch(self):
        cam = intr(10.0, 10.0, 1.0, 1.0, 2, 2)
        with pytest.raises(ShapeMismatch):
            from_rgbd([(np.zeros((3, 2, 3), np.uint8), np.ones((2, 2)), (cam, make_extrinsics()))])

    def test_count_matches_valid_pixels(self):
        rng = np.random.default_rng(0)
        cam = intr(60.0, 60.0, 32.0, 24.0, 64, 48)
        extr = make_extrinsics(t=(0.5, 0.2, 1.8))
        depth = rng.uniform(0.05, 30.0, (48, 64))
        rgb = rng.integers(0, 256, (48, 64, 3), dtype=np.uint8)
        scene = from_rgbd([(rgb, depth, (cam, extr))])
        assert len(scene) == int(((depth > 0.1) & (depth < 200.0)).sum())

    def test_reprojection_recovers_source_pixels(self):
        rng = np.random.default_rng(1)
        cam = intr(80.0, 75.0, 40.0, 30.0, 80, 60)
        extr = make_extrinsics(yaw_deg=25.0, t=(1.0, -0.3, 1.6))
        depth = rng.uniform(1.0, 40.0, (60, 80))
        rgb = rng.integers(0, 256, (60, 80, 3), dtype=np.uint8)
        scene = from_rgbd([(rgb, depth, (cam, extr))])
        u, v, z = project(cam, extr, scene.centers.astype(np.float64))
        vv, uu = np.nonzero(np.ones((60, 80), bool))
        assert np.max(np.abs(u - uu)) < 0.5
        assert np.max(np.abs(v - vv)) < 0.5
        np.testing.assert_allclose(z, depth[vv, uu], rtol=1e-6)


class TestAppendPoints:
    def _scene(self):
        return GaussianScene(
            centers=np.array([[0.0, 0.0, 1.0]], np.float32),
            radii=np.array([0.01], np.float32),
            colors=np.array([[0.5, 0.5, 0.5]], np.float32),
            foreground=np.array([False]),
        )

    def test_append_zero_points_identity(self):
        scene = self._scene()
        out = append_points(scene, np.zeros((0, 3)), np.zeros((0, 3)), True)
        assert len(out) == 1
        np.testing.assert_array_equal(out.centers, scene.centers)

    def test_append_foreground_radii(self):
        out = append_points(
            self._scene(), np.random.default_rng(0).uniform(-1, 8, (5, 3)),
            np.full((5, 3), 0.25), True,
        )
        assert len(out) == 6
        np.testing.assert_allclose(out.radii[1:], 0.0025, atol=1e-9)
        assert out.foreground[1:].all()

    def test_color_out_of_range(self):
        with pytest.raises(ColorOutOfRange):
            append_points(self._scene(), np.zeros((1, 3)), np.array([[1.5, 0.0, 0.0]]), False)


class TestPly:
    def test_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(2)
        n = 257
        scene = GaussianScene(
            centers=rng.normal(size=(n, 3)).astype(np.float32),
            radii=rng.uniform(0.001, 0.05, n).astype(np.float32),
            colors=(rng.integers(0, 256, (n, 3)).astype(np.float32) / np.float32(255.0)),
            foreground=rng.random(n) > 0.5,
        )
        path = tmp_path / "scene.ply"
        save_ply(scene, path)
        loaded = load_ply(path)
        np.testing.assert_array_equal(loaded.centers, scene.centers)
        np.testing.assert_array_equal(loaded.radii, scene.radii)
        np.testing.assert_array_equal(loaded.colors, scene.colors)
        np.testing.assert_array_equal(loaded.foreground, scene.foreground)

    def test_save_is_byte_deterministic(self, tmp_path):
        scene = GaussianScene(
            centers=np.array([[1.0, 2.0, 3.0]], np.float32),
            radii=np.array([0.02], np.float32),
            colors=np.array([[0.0, 1.0, 0.0]], np.float32),
            foreground=np.array([True]),
        )
        a, b = tmp_path / "a.ply", tmp_path / "b.ply"
        save_ply(scene, a)
        save_ply(scene, b)
        assert a.read_bytes() == b.read_bytes()

    def test_ascii_points_loadable(self, tmp_path):
        path = tmp_path / "pts.ply"
        path.write_text(
            "ply\nformat ascii 1.0\nelement vertex 2\n"
            "property float x\nproperty float y\nproperty float z\n"
            "property uchar red\nproperty uchar green\nproperty uchar blue\n"
            "end_header\n"
            "0.0 1.0 2.0 255 0 0\n"
            "3.5 -1.0 0.25 0 128 255\n"
        )
        pts, cols = load_colored_points(path)
        np.testing.assert_allclose(pts, [[0, 1, 2], [3.5, -1, 0.25]], atol=1e-6)
        np.testing.assert_allclose(cols[0], [1.0, 0.0, 0.0], atol=1e-6)

    def test_zero_vertex_roundtrip(self, tmp_path):
        path = tmp_path / "empty.ply"
        save_ply(GaussianScene.empty(), path)
        assert len(load_ply(path)) == 0

    def test_plain_point_ply_gets_schedule_radii(self, tmp_path):
        path = tmp_path / "pts.ply"
        path.write_text(
            "ply\nformat ascii 1.0\nelement vertex 1\n"
            "property float x\nproperty float y\nproperty float z\n"
            "property uchar red\nproperty uchar green\nproperty uchar blue\n"
            "end_header\n"
            "0.0 0.0 5.0 10 20 30\n"
        )
        scene = load_ply(path)
        assert scene.radii[0] == pytest.approx(0.0105, abs=1e-7)

    def test_invariants_enforced(self):
        with pytest.raises(ValueError):
            GaussianScene(
                centers=np.zeros((1, 3), np.float32),
                radii=np.array([0.0], np.float32),
                colors=np.zeros((1, 3), np.float32),
                foreground=np.array([False]),
            )
        with pytest.raises(ColorOutOfRange):
            GaussianScene(
                centers=np.zeros((1, 3), np.float32),
                radii=np.array([0.1], np.float32),
                colors=np.array([[0.0, -0.1, 0.0]], np.float32),
                foreground=np.array([False]),
            )
