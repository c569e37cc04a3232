"""Per-pixel spatial prior maps at feature resolution: the inverse-square-focal
constant map, normalized ground depth/gradient, and the 6-channel ray map in
Plücker coordinates (direction + moment about the ego origin)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import ground as _ground
from .errors import ShapeMismatch
from .rig import CameraExtrinsics, CameraIntrinsics

DEPTH_DIVISOR = 25.0
GRADIENT_DIVISOR = 2.0
FOCAL_DIVISOR = 500.0

FOCAL_CHANNEL_MODES = ("eq2", "normalized500")

CHANNEL_NAMES = (
    "focal",
    "ground_depth",
    "ground_gradient",
    "ray_dx",
    "ray_dy",
    "ray_dz",
    "moment_mx",
    "moment_my",
    "moment_mz",
)


def effective_focal(intr: CameraIntrinsics) -> float:
    """Scalar focal length: fu, or the geometric mean when fu != fv."""
    if intr.fu == intr.fv:
        return intr.fu
    return math.sqrt(intr.fu * intr.fv)


def inverse_focal_map(intr: CameraIntrinsics, out_w: int, out_h: int) -> np.ndarray:
    """Constant (1, H, W) map of 1/f^2 with f at the output working resolution."""
    si = intr if (intr.width == out_w and intr.height == out_h) else intr.scaled_to(out_w, out_h)
    f = effective_focal(si)
    return np.full((1, out_h, out_w), 1.0 / (f * f))


def plucker_ray(
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    u: np.ndarray,
    v: np.ndarray,
    unit_directions: bool = False,
) -> tuple[np.ndarray, np.ndarray]:
    """Ray through continuous pixel (u, v): direction d = R K^-1 [u,v,1] in the
    ego frame and moment m = t x d about the ego origin. Broadcasts over inputs.

    Directions keep their natural magnitude by default; unit_directions
    rescales d (and hence m) to unit length.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    x = (u - intr.cu) / intr.fu
    y = (v - intr.cv) / intr.fv
    r = extr.rotation
    d = np.stack(
        [
            r[0, 0] * x + r[0, 1] * y + r[0, 2],
            r[1, 0] * x + r[1, 1] * y + r[1, 2],
            r[2, 0] * x + r[2, 1] * y + r[2, 2],
        ],
        axis=-1,
    )
    if unit_directions:
        d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    t = extr.translation
    m = np.cross(np.broadcast_to(t, d.shape), d)
    return d, m


def plucker_raymap(
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    out_w: int,
    out_h: int,
    unit_directions: bool = False,
) -> np.ndarray:
    """(6, H, W) map of per-pixel rays: channels (dx, dy, dz, mx, my, mz)."""
    si = intr if (intr.width == out_w and intr.height == out_h) else intr.scaled_to(out_w, out_h)
    uu, vv = np.meshgrid(
        np.arange(out_w, dtype=np.float64), np.arange(out_h, dtype=np.float64), indexing="xy"
    )
    d, m = plucker_ray(si, extr, uu, vv, unit_directions=unit_directions)
    return np.concatenate([np.moveaxis(d, -1, 0), np.moveaxis(m, -1, 0)], axis=0)


@dataclass(frozen=True)
class PriorMapSet:
    """The per-camera prior maps, all at one H x W feature resolution.

    inverse_focal holds the multiplicative 1/f^2 modulator; focal_channel is
    what enters the concatenated raw-prior stack (equal to inverse_focal in
    "eq2" mode, a constant f/500 map in "normalized500" mode). ground_depth
    and ground_gradient are the normalized (/25, /2) maps; rays is the
    6-channel direction+moment stack; valid marks pixels whose ground priors
    are meaningful.
    """

    inverse_focal: np.ndarray
    ground_depth: np.ndarray
    ground_gradient: np.ndarray
    rays: np.ndarray
    valid: np.ndarray
    focal_channel: np.ndarray
    focal_channel_mode: str

    def __post_init__(self) -> None:
        shape = self.inverse_focal.shape[1:]
        for name in ("inverse_focal", "ground_depth", "ground_gradient", "focal_channel", "valid"):
            arr = getattr(self, name)
            if arr.shape != (1, *shape):
                raise ShapeMismatch(f"{name} has shape {arr.shape}, expected {(1, *shape)}")
        if self.rays.shape != (6, *shape):
            raise ShapeMismatch(f"rays has shape {self.rays.shape}, expected {(6, *shape)}")
        for name in (
            "inverse_focal",
            "ground_depth",
            "ground_gradient",
            "rays",
            "valid",
            "focal_channel",
        ):
            getattr(self, name).setflags(write=False)

    @property
    def height(self) -> int:
        return self.inverse_focal.shape[1]

    @property
    def width(self) -> int:
        return self.inverse_focal.shape[2]

    def stack(self) -> np.ndarray:
        """The 9-channel raw prior stack in the documented channel order."""
        return np.concatenate(
            [self.focal_channel, self.ground_depth, self.ground_gradient, self.rays], axis=0
        )

    def mixture(self) -> np.ndarray:
        """The 8-channel projector input (ground depth, gradient, rays),
        zeroed where the validity mask is false."""
        mix = np.concatenate([self.ground_depth, self.ground_gradient, self.rays], axis=0)
        return mix * self.valid


def build_prior_set(
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    out_w: int,
    out_h: int,
    max_depth: float = _ground.DEFAULT_MAX_DEPTH,
    focal_channel_mode: str = "normalized500",
    sample_count: int = 16,
) -> PriorMapSet:
    """Assemble all prior maps for one camera at the given feature resolution."""
    if focal_channel_mode not in FOCAL_CHANNEL_MODES:
        raise ValueError(
            f"focal_channel_mode must be one of {FOCAL_CHANNEL_MODES}, got {focal_channel_mode!r}"
        )
    si = intr if (intr.width == out_w and intr.height == out_h) else intr.scaled_to(out_w, out_h)
    inv_focal = inverse_focal_map(si, out_w, out_h)
    plane = _ground.fit_ground_plane(extr, sample_count=sample_count)
    gd = _ground.ground_depth_map(si, plane, out_w, out_h, max_depth=max_depth)
    gg = _ground.ground_gradient_map(gd)
    rays = plucker_raymap(si, extr, out_w, out_h)
    if focal_channel_mode == "eq2":
        focal_channel = inv_focal.copy()
    else:
        f = effective_focal(si)
        focal_channel = np.full((1, out_h, out_w), f / FOCAL_DIVISOR)
    return PriorMapSet(
        inverse_focal=inv_focal,
        ground_depth=gd.values[None, :, :] / DEPTH_DIVISOR,
        ground_gradient=gg.values[None, :, :] / GRADIENT_DIVISOR,
        rays=rays,
        valid=(gd.valid & gg.valid)[None, :, :],
        focal_channel=focal_channel,
        focal_channel_mode=focal_channel_mode,
    )
