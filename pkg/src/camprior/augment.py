"""Camera-configuration augmentation: counter-based sampling of perturbed
intrinsics/extrinsics, the raw-vs-rendered branch choice, and focal resize of
raw images about the principal point."""

from __future__ import annotations

import enum
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidSpec, NonPositiveScale
from .rig import CameraExtrinsics, CameraIntrinsics, rot_x, rot_y, rot_z

_LANES = 8  # focal, tx, ty, tz, rx, ry, rz, branch


@dataclass(frozen=True)
class AugmentSpec:
    """Sampling ranges for one augmentation draw.

    Focal is multiplicative, tx/ty are deltas in ego axes, tz is drawn as an
    absolute mounting height, rx/ry/rz are degree perturbations about ego
    axes (rz on top of the base yaw).
    """

    focal_scale_range: tuple[float, float] = (0.7, 1.4)
    tx_delta: float = 0.2
    ty_delta: float = 0.2
    tz_range: tuple[float, float] = (1.5, 2.2)
    rx_range_deg: float = 2.0
    ry_range_deg: float = 2.0
    rz_delta_deg: float = 20.0
    raw_vs_nvs_prob: float = 0.5

    def __post_init__(self) -> None:
        fs = tuple(float(x) for x in self.focal_scale_range)
        tz = tuple(float(x) for x in self.tz_range)
        object.__setattr__(self, "focal_scale_range", fs)
        object.__setattr__(self, "tz_range", tz)
        if not (fs[0] <= fs[1]) or fs[0] <= 0:
            raise InvalidSpec(f"focal_scale_range must be 0 < lo <= hi, got {fs}")
        if not tz[0] <= tz[1]:
            raise InvalidSpec(f"tz_range must be lo <= hi, got {tz}")
        for name in ("tx_delta", "ty_delta", "rx_range_deg", "ry_range_deg", "rz_delta_deg"):
            if getattr(self, name) < 0:
                raise InvalidSpec(f"{name} must be >= 0")
        if not 0.0 <= self.raw_vs_nvs_prob <= 1.0:
            raise InvalidSpec(f"raw_vs_nvs_prob must be in [0, 1], got {self.raw_vs_nvs_prob}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["focal_scale_range"] = list(self.focal_scale_range)
        d["tz_range"] = list(self.tz_range)
        return d

    @staticmethod
    def from_json(data: dict) -> "AugmentSpec":
        kwargs = dict(data)
        if "focal_scale_range" in kwargs:
            kwargs["focal_scale_range"] = tuple(kwargs["focal_scale_range"])
        if "tz_range" in kwargs:
            kwargs["tz_range"] = tuple(kwargs["tz_range"])
        return AugmentSpec(**kwargs)

    @staticmethod
    def load(path: str | Path) -> "AugmentSpec":
        return AugmentSpec.from_json(json.loads(Path(path).read_text()))


class Branch(enum.Enum):
    RAW = "raw"
    NOVEL_VIEW = "novel_view"


def _lanes(seed: int, index: int) -> np.ndarray:
    """Eight uniforms on [0, 1) from a Philox stream keyed by (seed, index);
    each parameter reads a fixed lane, so draws are order-independent."""
    if index < 0:
        raise ValueError(f"index must be >= 0, got {index}")
    key = [np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(index)]
    return np.random.Generator(np.random.Philox(key=key)).uniform(size=_LANES)


def _uniform(u: float, lo: float, hi: float) -> float:
    return lo + u * (hi - lo)


def sample_camera(
    base: tuple[CameraIntrinsics, CameraExtrinsics],
    spec: AugmentSpec,
    seed: int,
    index: int,
) -> tuple[CameraIntrinsics, CameraExtrinsics]:
    """One deterministic perturbed camera per (seed, index).

    Rotation perturbations compose roll(x) -> pitch(y) -> yaw(z) about ego
    axes on top of the base rotation; tz is replaced by the sampled absolute
    height.
    """
    intr, extr = base
    u = _lanes(seed, index)
    fscale = _uniform(u[0], *spec.focal_scale_range)
    t = extr.translation
    tx = t[0] + _uniform(u[1], -spec.tx_delta, spec.tx_delta)
    ty = t[1] + _uniform(u[2], -spec.ty_delta, spec.ty_delta)
    tz = _uniform(u[3], *spec.tz_range)
    rx = math.radians(_uniform(u[4], -spec.rx_range_deg, spec.rx_range_deg))
    ry = math.radians(_uniform(u[5], -spec.ry_range_deg, spec.ry_range_deg))
    rz = math.radians(_uniform(u[6], -spec.rz_delta_deg, spec.rz_delta_deg))
    rotation = rot_z(rz) @ rot_y(ry) @ rot_x(rx) @ extr.rotation
    new_intr = intr.with_focal_scale(fscale)
    new_extr = CameraExtrinsics(rotation, np.array([tx, ty, tz]))
    return new_intr, new_extr


def choose_branch(seed: int, index: int, spec: AugmentSpec) -> Branch:
    """Deterministic Bernoulli(raw_vs_nvs_prob) pick of raw image vs rendered view."""
    return Branch.RAW if _lanes(seed, index)[7] < spec.raw_vs_nvs_prob else Branch.NOVEL_VIEW


@dataclass(frozen=True)
class FocalResizeResult:
    image: np.ndarray  # same dtype and canvas as the input
    intrinsics: CameraIntrinsics
    coverage: np.ndarray  # (H, W) bool, false where no source data existed


def focal_resize(
    image: np.ndarray, intr: CameraIntrinsics, scale: float
) -> FocalResizeResult:
    """Zoom about the principal point by adjusting focal length only.

    Output keeps the input canvas; intrinsics gain f*scale with the principal
    point fixed, so any 3D point's projection under the new intrinsics lands
    where its old projection was resampled to. Uncovered pixels (scale < 1)
    are black and flagged in the coverage mask.
    """
    if scale <= 0:
        raise NonPositiveScale(f"scale must be > 0, got {scale}")
    img = np.asarray(image)
    if img.shape[:2] != (intr.height, intr.width):
        raise ValueError(f"image {img.shape[:2]} does not match camera {intr.height, intr.width}")
    new_intr = intr.with_focal_scale(scale)
    if scale == 1.0:
        return FocalResizeResult(
            image=img.copy(),
            intrinsics=new_intr,
            coverage=np.ones(img.shape[:2], dtype=bool),
        )
    h, w = img.shape[:2]
    us = intr.cu + (np.arange(w, dtype=np.float64) - intr.cu) / scale
    vs = intr.cv + (np.arange(h, dtype=np.float64) - intr.cv) / scale
    src_u, src_v = np.meshgrid(us, vs, indexing="xy")
    coverage = (src_u >= 0) & (src_u <= w - 1) & (src_v >= 0) & (src_v <= h - 1)
    cu = np.clip(src_u, 0, w - 1)
    cv = np.clip(src_v, 0, h - 1)
    u0 = np.clip(np.floor(cu).astype(np.int64), 0, w - 2) if w > 1 else np.zeros_like(cu, np.int64)
    v0 = np.clip(np.floor(cv).astype(np.int64), 0, h - 2) if h > 1 else np.zeros_like(cv, np.int64)
    fu = cu - u0
    fv = cv - v0
    planes = img.astype(np.float64)
    if planes.ndim == 2:
        planes = planes[:, :, None]
    u1 = np.minimum(u0 + 1, w - 1)
    v1 = np.minimum(v0 + 1, h - 1)
    top = planes[v0, u0] * (1 - fu)[..., None] + planes[v0, u1] * fu[..., None]
    bot = planes[v1, u0] * (1 - fu)[..., None] + planes[v1, u1] * fu[..., None]
    out = top * (1 - fv)[..., None] + bot * fv[..., None]
    out *= coverage[..., None]
    if np.issubdtype(img.dtype, np.integer):
        out = np.rint(out).astype(img.dtype)
    else:
        out = out.astype(img.dtype)
    if img.ndim == 2:
        out = out[:, :, 0]
    return FocalResizeResult(image=out, intrinsics=new_intr, coverage=coverage)
