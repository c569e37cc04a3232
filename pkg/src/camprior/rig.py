"""Pinhole camera model, multi-camera rigs, dataset presets, and projection primitives.

Conventions (fixed across the whole package):
  camera frame: x right, y down, z forward (optical axis)
  ego frame:    x forward, y left, z up; origin at the rear-axle ground projection
  extrinsics:   p_ego = R @ p_cam + t  (camera -> ego)
  pixels:       continuous coordinates, integer (u, v) at pixel centers
Angles are radians internally; degrees only at I/O boundaries.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import (
    BehindCamera,
    NonPositiveDepth,
    ScaleMismatch,
    UnknownCamera,
    UnknownPreset,
)

EGO_FRAME_NOTE = (
    "ego frame: x forward, y left, z up, origin at the rear-axle ground projection; "
    "camera frame: x right, y down, z forward; R,t map camera to ego; "
    "preset rotations are R_z(yaw_about_ego_z) @ R_BASE_FORWARD"
)

# Maps camera axes (x right, y down, z forward) onto ego axes for a camera
# looking along ego +x: cam x -> -ego y, cam y -> -ego z, cam z -> +ego x.
R_BASE_FORWARD = np.array(
    [
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
    ]
)
R_BASE_FORWARD.setflags(write=False)

_ORTHONORMAL_TOL = 1e-9


def rot_x(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle_rad: float) -> np.ndarray:
    c, s = math.cos(angle_rad), math.sin(angle_rad)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics in pixels, tied to a concrete image resolution."""

    fu: float
    fv: float
    cu: float
    cv: float
    width: int
    height: int

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size must be >= 1, got {self.width}x{self.height}")
        if self.fu <= 0 or self.fv <= 0:
            raise ValueError(f"focal lengths must be > 0, got fu={self.fu}, fv={self.fv}")
        if not (0 < self.cu < self.width):
            raise ValueError(f"cu={self.cu} outside (0, {self.width})")
        if not (0 < self.cv < self.height):
            raise ValueError(f"cv={self.cv} outside (0, {self.height})")

    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.fu, 0.0, self.cu], [0.0, self.fv, self.cv], [0.0, 0.0, 1.0]]
        )

    def scaled(self, scale: float) -> "CameraIntrinsics":
        """Uniformly rescale to a new working resolution (rounded to pixels)."""
        if scale <= 0:
            raise ValueError(f"scale must be > 0, got {scale}")
        return CameraIntrinsics(
            fu=self.fu * scale,
            fv=self.fv * scale,
            cu=self.cu * scale,
            cv=self.cv * scale,
            width=max(1, round(self.width * scale)),
            height=max(1, round(self.height * scale)),
        )

    def scaled_to(self, out_w: int, out_h: int) -> "CameraIntrinsics":
        """Rescale by out_w/width; out_h must agree with the same ratio (+-1 px rounding)."""
        scale = out_w / self.width
        if abs(out_h - self.height * scale) > 1.0:
            raise ScaleMismatch(
                f"{out_w}x{out_h} is not a uniform rescale of {self.width}x{self.height}"
            )
        return CameraIntrinsics(
            fu=self.fu * scale,
            fv=self.fv * scale,
            cu=self.cu * scale,
            cv=self.cv * scale,
            width=out_w,
            height=out_h,
        )

    def with_focal_scale(self, k: float) -> "CameraIntrinsics":
        """Scale focal lengths only (zoom); principal point and canvas unchanged."""
        return CameraIntrinsics(self.fu * k, self.fv * k, self.cu, self.cv, self.width, self.height)


@dataclass(frozen=True)
class CameraExtrinsics:
    """Rigid camera-to-ego transform: p_ego = rotation @ p_cam + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3).copy()
        t = np.asarray(self.translation, dtype=np.float64).reshape(3).copy()
        if not np.allclose(r.T @ r, np.eye(3), atol=_ORTHONORMAL_TOL, rtol=0.0):
            raise ValueError("rotation is not orthonormal within 1e-9")
        if abs(np.linalg.det(r) - 1.0) > _ORTHONORMAL_TOL:
            raise ValueError("rotation determinant differs from 1 beyond 1e-9")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m

    def cam_to_ego(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return p @ self.rotation.T + self.translation

    def ego_to_cam(self, points: np.ndarray) -> np.ndarray:
        p = np.asarray(points, dtype=np.float64)
        return (p - self.translation) @ self.rotation

    @staticmethod
    def identity() -> "CameraExtrinsics":
        return CameraExtrinsics(np.eye(3), np.zeros(3))

    @staticmethod
    def from_yaw(yaw_deg: float, translation: Sequence[float]) -> "CameraExtrinsics":
        """Forward-facing camera yawed about ego z (the preset construction)."""
        r = rot_z(math.radians(yaw_deg)) @ R_BASE_FORWARD
        return CameraExtrinsics(r, np.asarray(translation, dtype=np.float64))


class RigCamera(NamedTuple):
    name: str
    intrinsics: CameraIntrinsics
    extrinsics: CameraExtrinsics


@dataclass(frozen=True)
class CameraRig:
    """Ordered, immutable collection of named cameras sharing one ego frame."""

    cameras: tuple[RigCamera, ...]
    ego_frame_note: str = EGO_FRAME_NOTE

    def __post_init__(self) -> None:
        cams = tuple(RigCamera(*c) for c in self.cameras)
        if not cams:
            raise ValueError("rig must contain at least one camera")
        names = [c.name for c in cams]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate camera names: {names}")
        object.__setattr__(self, "cameras", cams)

    def __len__(self) -> int:
        return len(self.cameras)

    def __iter__(self) -> Iterator[RigCamera]:
        return iter(self.cameras)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.cameras]

    def camera(self, name: str) -> RigCamera:
        for cam in self.cameras:
            if cam.name == name:
                return cam
        raise UnknownCamera(f"no camera named {name!r}; rig has {self.names}")


def horizontal_fov(intr: CameraIntrinsics) -> float:
    """Horizontal field of view in degrees: 2*arctan(cu/fu)."""
    return math.degrees(2.0 * math.atan(intr.cu / intr.fu))


def vertical_fov(intr: CameraIntrinsics) -> float:
    """Vertical field of view in degrees: 2*arctan((height-cv)/fv)."""
    return math.degrees(2.0 * math.atan((intr.height - intr.cv) / intr.fv))


def project(
    intr: CameraIntrinsics, extr: CameraExtrinsics, p_ego: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project ego-frame point(s) to (u, v, camera-frame depth z).

    Accepts a single (3,) point or an (N, 3) batch; raises BehindCamera if
    any depth is <= 0.
    """
    p = np.asarray(p_ego, dtype=np.float64)
    single = p.ndim == 1
    p_cam = extr.ego_to_cam(np.atleast_2d(p))
    z = p_cam[:, 2]
    if np.any(z <= 0):
        raise BehindCamera(f"{int(np.sum(z <= 0))} point(s) at camera-frame depth <= 0")
    u = intr.fu * (p_cam[:, 0] / z) + intr.cu
    v = intr.fv * (p_cam[:, 1] / z) + intr.cv
    if single:
        return u[0], v[0], z[0]
    return u, v, z


def unproject(
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    u: np.ndarray,
    v: np.ndarray,
    z: np.ndarray,
) -> np.ndarray:
    """Lift pixel(s) at camera-frame depth z back to ego-frame 3D points."""
    u, v, z = np.broadcast_arrays(
        np.asarray(u, dtype=np.float64),
        np.asarray(v, dtype=np.float64),
        np.asarray(z, dtype=np.float64),
    )
    if np.any(z <= 0):
        raise NonPositiveDepth(f"{int(np.sum(z <= 0))} depth value(s) <= 0")
    x = (u - intr.cu) / intr.fu * z
    y = (v - intr.cv) / intr.fv * z
    p_cam = np.stack([x, y, z], axis=-1)
    out = extr.cam_to_ego(p_cam.reshape(-1, 3)).reshape(p_cam.shape)
    return out


# Preset camera tables: (name, width, height, focal, (tx, ty, tz), yaw_deg).
# Pitch and roll are zero; principal point sits at the image center.
_PRESETS: dict[str, list[tuple[str, int, int, float, tuple[float, float, float], float]]] = {
    "nuscenes": [
        ("front", 1600, 900, 1250.0, (1.7, 0.0, 1.5), 0.0),
        ("front_left", 1600, 900, 1250.0, (1.55, 0.5, 1.5), 55.0),
        ("front_right", 1600, 900, 1250.0, (1.55, -0.5, 1.5), -55.0),
        ("back", 1600, 900, 800.0, (0.0, 0.0, 1.5), 180.0),
        ("back_left", 1600, 900, 1250.0, (1.0, 0.5, 1.55), 110.0),
        ("back_right", 1600, 900, 1250.0, (1.0, -0.5, 1.55), -110.0),
    ],
    "lyft_fleet1": [
        ("front", 1224, 1024, 880.0, (1.5, 0.0, 1.7), 0.0),
        ("front_left", 1224, 1024, 880.0, (1.3, 0.3, 1.7), 60.0),
        ("front_right", 1224, 1024, 880.0, (1.3, -0.3, 1.7), -60.0),
        ("back", 1224, 1024, 880.0, (0.8, 0.0, 1.65), 180.0),
        ("back_left", 1224, 1024, 880.0, (1.0, 0.3, 1.65), 120.0),
        ("back_right", 1224, 1024, 880.0, (1.0, -0.3, 1.65), -120.0),
    ],
    "lyft_fleet2": [
        ("front", 1920, 1080, 1100.0, (1.5, 0.0, 1.65), 0.0),
        ("front_left", 1920, 1080, 1100.0, (1.3, 0.3, 1.65), 60.0),
        ("front_right", 1920, 1080, 1100.0, (1.3, -0.3, 1.65), -60.0),
        ("back", 1920, 1080, 1100.0, (0.8, 0.0, 1.65), 180.0),
        ("back_left", 1920, 1080, 1100.0, (1.0, 0.3, 1.65), 120.0),
        ("back_right", 1920, 1080, 1100.0, (1.0, -0.3, 1.65), -120.0),
    ],
    "waymo": [
        ("front", 1920, 1280, 2050.0, (1.55, 0.0, 2.1), 0.0),
        ("front_left", 1920, 1280, 2050.0, (1.5, 0.1, 2.1), 45.0),
        ("front_right", 1920, 1280, 2050.0, (1.5, -0.1, 2.1), -45.0),
        ("side_left", 1920, 886, 2050.0, (1.4, 0.1, 2.1), 90.0),
        ("side_right", 1920, 886, 2050.0, (1.4, -0.1, 2.1), -90.0),
    ],
}

PRESET_NAMES = tuple(sorted(_PRESETS))


def preset_rig(name: str) -> CameraRig:
    """Build one of the bundled dataset rigs (nuscenes, lyft_fleet1, lyft_fleet2, waymo)."""
    try:
        rows = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; available: {PRESET_NAMES}") from None
    cams = []
    for cam_name, w, h, f, t, yaw in rows:
        intr = CameraIntrinsics(fu=f, fv=f, cu=w / 2.0, cv=h / 2.0, width=w, height=h)
        cams.append(RigCamera(cam_name, intr, CameraExtrinsics.from_yaw(yaw, t)))
    return CameraRig(tuple(cams))


def rig_to_json(rig: CameraRig) -> dict:
    """Serialize a rig to the documented JSON schema."""
    return {
        "cameras": [
            {
                "name": cam.name,
                "width": cam.intrinsics.width,
                "height": cam.intrinsics.height,
                "fu": cam.intrinsics.fu,
                "fv": cam.intrinsics.fv,
                "cu": cam.intrinsics.cu,
                "cv": cam.intrinsics.cv,
                "R": [float(x) for x in cam.extrinsics.rotation.reshape(-1)],
                "t": [float(x) for x in cam.extrinsics.translation],
            }
            for cam in rig
        ],
        "ego_frame_note": rig.ego_frame_note,
    }


def rig_from_json(data: dict) -> CameraRig:
    """Parse the rig JSON schema; principal point defaults to the image center."""
    cams = []
    for entry in data["cameras"]:
        w = int(entry["width"])
        h = int(entry["height"])
        intr = CameraIntrinsics(
            fu=float(entry["fu"]),
            fv=float(entry["fv"]),
            cu=float(entry.get("cu", w / 2.0)),
            cv=float(entry.get("cv", h / 2.0)),
            width=w,
            height=h,
        )
        extr = CameraExtrinsics(
            np.asarray(entry["R"], dtype=np.float64).reshape(3, 3),
            np.asarray(entry["t"], dtype=np.float64),
        )
        cams.append(RigCamera(str(entry["name"]), intr, extr))
    note = data.get("ego_frame_note", EGO_FRAME_NOTE)
    return CameraRig(tuple(cams), ego_frame_note=note)


def save_rig(rig: CameraRig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(rig_to_json(rig), indent=2) + "\n")


def load_rig(source: str | Path) -> CameraRig:
    """Load a rig from a preset name or a JSON file path."""
    if isinstance(source, str) and source in _PRESETS:
        return preset_rig(source)
    p = Path(source)
    if not p.exists():
        raise UnknownPreset(
            f"{source!r} is neither a preset ({PRESET_NAMES}) nor an existing file"
        )
    return rig_from_json(json.loads(p.read_text()))
