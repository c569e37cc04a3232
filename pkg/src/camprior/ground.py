"""Ground-plane geometry: least-squares plane fit, per-pixel ground depth and
its log-inverse cross-row gradient, and the bottom-of-image depth formula."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSamples, InvalidFov, TooFewRows
from .rig import CameraExtrinsics, CameraIntrinsics

DEFAULT_MAX_DEPTH = 100.0

# Deterministic ego-ground sampling region for the plane fit (meters).
_SAMPLE_X = (2.0, 50.0)
_SAMPLE_Y = (-10.0, 10.0)


@dataclass(frozen=True)
class GroundPlane:
    """Plane a*x + b*y + c*z + d = 0 in the camera frame, unit normal (a, b, c).

    Oriented so the camera center lies on the negative side (d <= 0 up to
    float tolerance), i.e. the normal points from the camera toward the ground.
    """

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self) -> None:
        n = math.sqrt(self.a * self.a + self.b * self.b + self.c * self.c)
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"normal must be unit length, got |n|={n}")

    @property
    def normal(self) -> np.ndarray:
        return np.array([self.a, self.b, self.c])

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return p @ self.normal + self.d


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel depth in meters with a validity mask (both height x width)."""

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        m = np.asarray(self.valid, dtype=bool)
        if v.shape != m.shape or v.ndim != 2:
            raise ValueError(f"values {v.shape} and valid {m.shape} must be equal 2-D shapes")
        v.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "valid", m)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class GradientMap:
    """Log-inverse cross-row depth gradient; invalid pixels hold exactly 0."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2:
            raise ValueError("gradient values must be 2-D")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def valid(self) -> np.ndarray:
        return self.values > 0.0


def ground_sample_points(count: int = 16) -> np.ndarray:
    """Deterministic grid of ego-frame ground points (z=0) ahead of the vehicle."""
    if count < 3:
        raise ValueError(f"need at least 3 samples, got {count}")
    nx = math.ceil(math.sqrt(count))
    ny = math.ceil(count / nx)
    xs = np.linspace(*_SAMPLE_X, nx)
    ys = np.linspace(*_SAMPLE_Y, ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.reshape(-1), gy.reshape(-1), np.zeros(nx * ny)], axis=1)
    return pts[:count]


def fit_plane(points: np.ndarray) -> GroundPlane:
    """Total-least-squares plane through exactly coplanar or scattered points."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if p.shape[0] < 3:
        raise DegenerateSamples(f"plane fit needs >= 3 points, got {p.shape[0]}")
    centroid = p.mean(axis=0)
    centered = p - centroid
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    # Collinear points leave only one significant singular direction.
    if s[1] <= 1e-12 * max(s[0], 1.0):
        raise DegenerateSamples("sample points are collinear")
    normal = vt[2]
    d = -float(normal @ centroid)
    if d > 1e-12 or (abs(d) <= 1e-12 and normal[np.argmax(np.abs(normal))] < 0):
        normal = -normal
        d = -d
    return GroundPlane(float(normal[0]), float(normal[1]), float(normal[2]), d)


def fit_ground_plane(extr: CameraExtrinsics, sample_count: int = 16) -> GroundPlane:
    """Fit the ego ground plane (z_ego = 0) expressed in this camera's frame."""
    pts_ego = ground_sample_points(sample_count)
    return fit_plane(extr.ego_to_cam(pts_ego))


def ground_depth_at(plane: GroundPlane, x_norm: np.ndarray, y_norm: np.ndarray) -> np.ndarray:
    """Depth at normalized camera coordinates (X, Y) assuming the ray hits the plane.

    Returns -d / (a*X + b*Y + c); pixels at or above the horizon yield
    non-positive or non-finite values which callers must mask.
    """
    x = np.asarray(x_norm, dtype=np.float64)
    y = np.asarray(y_norm, dtype=np.float64)
    denom = plane.a * x + plane.b * y + plane.c
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(denom != 0.0, -plane.d / denom, np.inf)


def ground_depth_map(
    intr: CameraIntrinsics,
    plane: GroundPlane,
    out_w: int,
    out_h: int,
    max_depth: float = DEFAULT_MAX_DEPTH,
) -> DepthMap:
    """Evaluate the ground depth on the pixel grid at out_w x out_h.

    Intrinsics are rescaled to the output resolution by the uniform
    out_w/width factor. Horizon and beyond-max_depth pixels are invalid and
    clamped to max_depth so downstream normalization stays finite.
    """
    if out_w < 1 or out_h < 1:
        raise ValueError(f"output size must be >= 1, got {out_w}x{out_h}")
    if max_depth <= 0:
        raise ValueError(f"max_depth must be > 0, got {max_depth}")
    si = intr if (intr.width == out_w and intr.height == out_h) else intr.scaled_to(out_w, out_h)
    u = np.arange(out_w, dtype=np.float64)
    v = np.arange(out_h, dtype=np.float64)
    x = (u - si.cu) / si.fu
    y = (v - si.cv) / si.fv
    z = ground_depth_at(plane, x[None, :], y[:, None])
    valid = np.isfinite(z) & (z > 0.0) & (z <= max_depth)
    values = np.where(valid, z, max_depth)
    return DepthMap(values=values, valid=valid)


def initial_ground_depth(cam_height: float, vertical_fov_deg: float) -> float:
    """Ground depth seen at the image bottom: height / tan(fov/2)."""
    if not 0.0 < vertical_fov_deg < 180.0:
        raise InvalidFov(f"vertical fov must be in (0, 180) degrees, got {vertical_fov_deg}")
    if cam_height <= 0:
        raise ValueError(f"camera height must be > 0, got {cam_height}")
    return cam_height / math.tan(math.radians(vertical_fov_deg) / 2.0)


def ground_gradient_map(gd: DepthMap) -> GradientMap:
    """Log-inverse cross-row depth difference, log(1/(z[r-1] - z[r]) + 1).

    The difference between depth rows (r-1, r) lands at output row r; row 0
    replicates row 1 so the map keeps the input height. Pixels where either
    contributing row is invalid, or the difference is not positive, hold 0.
    """
    if gd.height < 2:
        raise TooFewRows(f"gradient needs >= 2 rows, got {gd.height}")
    diff = gd.values[:-1, :] - gd.values[1:, :]
    ok = gd.valid[:-1, :] & gd.valid[1:, :] & (diff > 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.where(ok, np.log1p(1.0 / diff), 0.0)
    out = np.empty_like(gd.values)
    out[1:, :] = g
    out[0, :] = g[0, :]
    return GradientMap(values=out)
