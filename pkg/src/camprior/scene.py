"""Ego-centric Gaussian scenes built directly from colored points or RGB-D
views: isotropic, rotation-free, opacity-1 splats whose radius follows the
height-keyed schedule. PLY persistence uses float32 positions/radii and 8-bit
colors (binary little-endian, ASCII also readable)."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ColorOutOfRange, EmptyInput, ShapeMismatch
from .imageio import u8_to_unit, unit_to_u8
from .rig import CameraExtrinsics, CameraIntrinsics, unproject

FOREGROUND_RADIUS = 0.0025
BACKGROUND_RADIUS_AT_GROUND = 0.02
BACKGROUND_RADIUS_AT_TOP = 0.001
BACKGROUND_TOP_Z = 10.0

# RGB-D pixels outside this depth band are dropped (holes are upstream's job).
DEPTH_VALID_RANGE = (0.1, 200.0)


@dataclass(frozen=True)
class GaussianScene:
    """Isotropic Gaussians: centers/radii/colors plus a foreground flag.

    Opacity is implicitly 1 and covariance is implicitly radius * identity,
    so neither is stored.
    """

    centers: np.ndarray  # (N, 3) float32, ego frame, meters
    radii: np.ndarray  # (N,) float32, meters
    colors: np.ndarray  # (N, 3) float32 in [0, 1]
    foreground: np.ndarray  # (N,) bool

    def __post_init__(self) -> None:
        c = np.ascontiguousarray(self.centers, dtype=np.float32).reshape(-1, 3)
        r = np.ascontiguousarray(self.radii, dtype=np.float32).reshape(-1)
        col = np.ascontiguousarray(self.colors, dtype=np.float32).reshape(-1, 3)
        fg = np.ascontiguousarray(self.foreground, dtype=bool).reshape(-1)
        n = c.shape[0]
        if not (r.shape[0] == col.shape[0] == fg.shape[0] == n):
            raise ShapeMismatch(
                f"field lengths differ: centers {n}, radii {r.shape[0]}, "
                f"colors {col.shape[0]}, flags {fg.shape[0]}"
            )
        if n and np.min(r) <= 0:
            raise ValueError("radii must be > 0")
        if n and (np.min(col) < 0 or np.max(col) > 1):
            raise ColorOutOfRange("colors must lie in [0, 1]")
        for arr in (c, r, col, fg):
            arr.setflags(write=False)
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radii", r)
        object.__setattr__(self, "colors", col)
        object.__setattr__(self, "foreground", fg)

    def __len__(self) -> int:
        return self.centers.shape[0]

    @staticmethod
    def empty() -> "GaussianScene":
        return GaussianScene(
            centers=np.zeros((0, 3), dtype=np.float32),
            radii=np.zeros(0, dtype=np.float32),
            colors=np.zeros((0, 3), dtype=np.float32),
            foreground=np.zeros(0, dtype=bool),
        )


def radius_schedule(z_ego: np.ndarray, is_foreground: bool) -> np.ndarray:
    """Splat radius in meters: constant for foreground; background shrinks
    linearly from 0.02 at z=0 to 0.001 at z=10, clamped outside."""
    z = np.asarray(z_ego, dtype=np.float64)
    if is_foreground:
        return np.broadcast_to(np.float64(FOREGROUND_RADIUS), z.shape).copy()
    frac = np.clip(z / BACKGROUND_TOP_Z, 0.0, 1.0)
    return BACKGROUND_RADIUS_AT_GROUND + frac * (
        BACKGROUND_RADIUS_AT_TOP - BACKGROUND_RADIUS_AT_GROUND
    )


def _as_unit_rgb(rgb: np.ndarray) -> np.ndarray:
    a = np.asarray(rgb)
    if a.dtype == np.uint8:
        return u8_to_unit(a)
    a = a.astype(np.float32)
    if a.size and (a.min() < 0 or a.max() > 1):
        raise ColorOutOfRange("float RGB must lie in [0, 1]")
    return a


def from_rgbd(
    images: Sequence[tuple[np.ndarray, np.ndarray, tuple[CameraIntrinsics, CameraExtrinsics]]],
) -> GaussianScene:
    """One background Gaussian per valid depth pixel, unprojected to ego space.

    Each entry is (rgb, depth, (intrinsics, extrinsics)); rgb is (H, W, 3)
    uint8 or [0, 1] float, depth is (H, W) meters. Pixels with depth outside
    (0.1, 200) are skipped. Overlapping cameras are not deduplicated.
    """
    centers, colors = [], []
    lo, hi = DEPTH_VALID_RANGE
    for rgb, depth, (intr, extr) in images:
        rgb = _as_unit_rgb(rgb)
        depth = np.asarray(depth, dtype=np.float64)
        if rgb.ndim != 3 or rgb.shape[2] != 3 or rgb.shape[:2] != depth.shape:
            raise ShapeMismatch(f"rgb {rgb.shape} does not pair with depth {depth.shape}")
        h, w = depth.shape
        valid = np.isfinite(depth) & (depth > lo) & (depth < hi)
        if not valid.any():
            continue
        vv, uu = np.nonzero(valid)
        pts = unproject(intr, extr, uu.astype(np.float64), vv.astype(np.float64), depth[vv, uu])
        centers.append(pts)
        colors.append(rgb[vv, uu])
    if not centers:
        raise EmptyInput("no valid depth pixels in any input view")
    centers_all = np.concatenate(centers, axis=0)
    colors_all = np.concatenate(colors, axis=0)
    radii = radius_schedule(centers_all[:, 2], is_foreground=False)
    return GaussianScene(
        centers=centers_all.astype(np.float32),
        radii=radii.astype(np.float32),
        colors=colors_all.astype(np.float32),
        foreground=np.zeros(len(centers_all), dtype=bool),
    )


def append_points(
    scene: GaussianScene,
    points: np.ndarray,
    colors: np.ndarray,
    is_foreground: bool,
) -> GaussianScene:
    """Extend a scene with colored points; radii come from the schedule."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    cols = np.asarray(colors, dtype=np.float64).reshape(-1, 3)
    if pts.shape[0] != cols.shape[0]:
        raise ShapeMismatch(f"{pts.shape[0]} points vs {cols.shape[0]} colors")
    if pts.shape[0] == 0:
        return scene
    if cols.min() < 0 or cols.max() > 1:
        raise ColorOutOfRange("colors must lie in [0, 1]")
    radii = radius_schedule(pts[:, 2], is_foreground=is_foreground)
    flags = np.full(pts.shape[0], bool(is_foreground))
    return GaussianScene(
        centers=np.concatenate([scene.centers, pts.astype(np.float32)]),
        radii=np.concatenate([scene.radii, radii.astype(np.float32)]),
        colors=np.concatenate([scene.colors, cols.astype(np.float32)]),
        foreground=np.concatenate([scene.foreground, flags]),
    )


_PLY_SCENE_PROPS = [
    ("x", "float"),
    ("y", "float"),
    ("z", "float"),
    ("red", "uchar"),
    ("green", "uchar"),
    ("blue", "uchar"),
    ("radius", "float"),
    ("is_foreground", "uchar"),
]


def save_ply(scene: GaussianScene, path: str | Path) -> None:
    """Binary little-endian PLY with x,y,z,red,green,blue,radius,is_foreground."""
    n = len(scene)
    header = ["ply", "format binary_little_endian 1.0", f"element vertex {n}"]
    header += [f"property {typ} {name}" for name, typ in _PLY_SCENE_PROPS]
    header.append("end_header")
    rec = np.dtype(
        [
            ("x", "<f4"),
            ("y", "<f4"),
            ("z", "<f4"),
            ("red", "u1"),
            ("green", "u1"),
            ("blue", "u1"),
            ("radius", "<f4"),
            ("is_foreground", "u1"),
        ]
    )
    rows = np.empty(n, dtype=rec)
    rows["x"], rows["y"], rows["z"] = scene.centers[:, 0], scene.centers[:, 1], scene.centers[:, 2]
    rgb8 = unit_to_u8(scene.colors)
    rows["red"], rows["green"], rows["blue"] = rgb8[:, 0], rgb8[:, 1], rgb8[:, 2]
    rows["radius"] = scene.radii
    rows["is_foreground"] = scene.foreground.astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(rows.tobytes())


_PLY_TYPE_MAP = {
    "float": "<f4",
    "float32": "<f4",
    "double": "<f8",
    "float64": "<f8",
    "uchar": "u1",
    "uint8": "u1",
    "char": "i1",
    "int8": "i1",
    "ushort": "<u2",
    "uint16": "<u2",
    "short": "<i2",
    "int16": "<i2",
    "uint": "<u4",
    "uint32": "<u4",
    "int": "<i4",
    "int32": "<i4",
}


def _read_ply_vertices(path: str | Path) -> dict[str, np.ndarray]:
    raw = Path(path).read_bytes()
    end = raw.find(b"end_header\n")
    if not raw.startswith(b"ply") or end < 0:
        raise ValueError(f"{path}: not a PLY file")
    header = raw[: end + len(b"end_header\n")].decode("ascii").splitlines()
    body = raw[end + len(b"end_header\n") :]
    fmt = None
    count = 0
    props: list[tuple[str, str]] = []
    in_vertex = False
    for line in header[1:]:
        tok = line.split()
        if not tok:
            continue
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "element":
            in_vertex = tok[1] == "vertex"
            if in_vertex:
                count = int(tok[2])
        elif tok[0] == "property" and in_vertex:
            if tok[1] == "list":
                raise ValueError(f"{path}: list properties not supported")
            props.append((tok[2], tok[1]))
    if fmt not in ("binary_little_endian", "ascii"):
        raise ValueError(f"{path}: unsupported PLY format {fmt!r}")
    names = [n for n, _ in props]
    if count == 0:
        return {n: np.zeros(0) for n in names}
    if fmt == "binary_little_endian":
        rec = np.dtype([(n, _PLY_TYPE_MAP[t]) for n, t in props])
        rows = np.frombuffer(body, dtype=rec, count=count)
        return {n: np.ascontiguousarray(rows[n]) for n in names}
    table = np.loadtxt(body.decode("ascii").splitlines(), ndmin=2, max_rows=count)
    return {n: table[:, i] for i, n in enumerate(names)}


def load_colored_points(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read x,y,z + red,green,blue from a PLY; colors returned in [0, 1]."""
    cols = _read_ply_vertices(path)
    for req in ("x", "y", "z", "red", "green", "blue"):
        if req not in cols:
            raise ValueError(f"{path}: missing property {req!r}")
    pts = np.stack([cols["x"], cols["y"], cols["z"]], axis=1).astype(np.float32)
    rgb = np.stack([cols["red"], cols["green"], cols["blue"]], axis=1)
    return pts, u8_to_unit(rgb.astype(np.uint8))


def load_ply(path: str | Path) -> GaussianScene:
    """Read a scene PLY; radius/is_foreground default to the background
    schedule when the file carries only points and colors."""
    cols = _read_ply_vertices(path)
    pts, rgb = load_colored_points(path)
    if "radius" in cols:
        radii = cols["radius"].astype(np.float32)
    else:
        radii = radius_schedule(pts[:, 2].astype(np.float64), is_foreground=False).astype(
            np.float32
        )
    if "is_foreground" in cols:
        fg = cols["is_foreground"].astype(bool)
    else:
        fg = np.zeros(len(pts), dtype=bool)
    return GaussianScene(centers=pts, radii=radii, colors=rgb, foreground=fg)
