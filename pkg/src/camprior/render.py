"""Deterministic splat renderer: opacity-1 isotropic Gaussians drawn as
depth-tested screen-space ellipses (axis-aligned, semi-axes fu*r/z and
fv*r/z). Nearest depth wins; exact ties go to the lower Gaussian index, so
the output is identical for any tile schedule or thread count.

The tiled rasterizer bins Gaussians into 32x32 pixel tiles (stable counting
sort, ascending index within a tile) and assigns each tile to exactly one
worker; the per-pixel result is the same min-(z, index) reduction a
brute-force all-pairs pass computes.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Allow oversubscribed worker counts for determinism checks on small hosts;
# must happen before numba is first imported anywhere in the process.
os.environ.setdefault("NUMBA_NUM_THREADS", str(max(os.cpu_count() or 1, 4)))
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

import numba
from numba import njit, prange

from .rig import CameraExtrinsics, CameraIntrinsics, CameraRig
from .scene import GaussianScene

Z_NEAR = 0.05
TILE = 32


def max_threads() -> int:
    return numba.config.NUMBA_NUM_THREADS


def set_threads(n: int) -> int:
    """Set the renderer worker count (0 = all available); returns the
    effective value, clamped to the process launch-time maximum."""
    eff = max_threads() if n <= 0 else min(n, max_threads())
    numba.set_num_threads(eff)
    return eff


@dataclass(frozen=True)
class RenderTarget:
    """Rendered view: rgb in [0, 1], camera-frame depth, and the hit mask."""

    rgb: np.ndarray  # (H, W, 3) float32
    depth: np.ndarray  # (H, W) float64, background pixels hold +inf
    hit_mask: np.ndarray  # (H, W) bool
    background: np.ndarray  # (3,) float32

    @property
    def height(self) -> int:
        return self.rgb.shape[0]

    @property
    def width(self) -> int:
        return self.rgb.shape[1]


@njit(cache=True)
def _bin_counts(x0, x1, y0, y1, tiles_x, counts):
    n = x0.shape[0]
    total = 0
    for g in range(n):
        if x1[g] < x0[g] or y1[g] < y0[g]:
            continue
        for ty in range(y0[g] // TILE, y1[g] // TILE + 1):
            for tx in range(x0[g] // TILE, x1[g] // TILE + 1):
                counts[ty * tiles_x + tx] += 1
                total += 1
    return total


@njit(cache=True)
def _bin_fill(x0, x1, y0, y1, tiles_x, offsets, entries):
    cursor = offsets.copy()
    n = x0.shape[0]
    for g in range(n):  # ascending g keeps per-tile entries index-sorted
        if x1[g] < x0[g] or y1[g] < y0[g]:
            continue
        for ty in range(y0[g] // TILE, y1[g] // TILE + 1):
            for tx in range(x0[g] // TILE, x1[g] // TILE + 1):
                t = ty * tiles_x + tx
                entries[cursor[t]] = g
                cursor[t] += 1


@njit(parallel=True, cache=True)
def _raster_tiles(
    u, v, z, rx, ry, x0, x1, y0, y1, offsets, entries, tiles_x, tiles_y, width, height, zbuf, ibuf
):
    for t in prange(tiles_x * tiles_y):
        ty = t // tiles_x
        tx = t % tiles_x
        px_lo = tx * TILE
        px_hi = min(px_lo + TILE - 1, width - 1)
        py_lo = ty * TILE
        py_hi = min(py_lo + TILE - 1, height - 1)
        for k in range(offsets[t], offsets[t + 1]):
            g = entries[k]
            gz = z[g]
            ya = y0[g] if y0[g] > py_lo else py_lo
            yb = y1[g] if y1[g] < py_hi else py_hi
            xa = x0[g] if x0[g] > px_lo else px_lo
            xb = x1[g] if x1[g] < px_hi else px_hi
            for py in range(ya, yb + 1):
                dy = (py - v[g]) / ry[g]
                dy2 = dy * dy
                if dy2 > 1.0:
                    continue
                for px in range(xa, xb + 1):
                    dx = (px - u[g]) / rx[g]
                    if dx * dx + dy2 <= 1.0 and gz < zbuf[py, px]:
                        zbuf[py, px] = gz
                        ibuf[py, px] = g


def _project_gaussians(
    scene: GaussianScene, intr: CameraIntrinsics, extr: CameraExtrinsics
) -> tuple[np.ndarray, ...]:
    """Camera-frame depth, screen center, and screen semi-axes per Gaussian.

    Elementwise formulas (no matmul) so an independent scalar reference can
    reproduce every value bit-for-bit.
    """
    r = extr.rotation
    t = extr.translation
    cx = scene.centers[:, 0].astype(np.float64)
    cy = scene.centers[:, 1].astype(np.float64)
    cz = scene.centers[:, 2].astype(np.float64)
    dx = cx - t[0]
    dy = cy - t[1]
    dz = cz - t[2]
    # p_cam = R^T (p - t), expanded per component
    px = r[0, 0] * dx + r[1, 0] * dy + r[2, 0] * dz
    py = r[0, 1] * dx + r[1, 1] * dy + r[2, 1] * dz
    pz = r[0, 2] * dx + r[1, 2] * dy + r[2, 2] * dz
    rad = scene.radii.astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = intr.fu * (px / pz) + intr.cu
        v = intr.fv * (py / pz) + intr.cv
        rx = intr.fu * rad / pz
        ry = intr.fv * rad / pz
    return u, v, pz, rx, ry


def render(
    scene: GaussianScene,
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    frustum_culling: bool = True,
) -> RenderTarget:
    """Rasterize the scene into one camera. Empty scenes yield background only."""
    bg = np.asarray(background, dtype=np.float32).reshape(3)
    width, height = intr.width, intr.height
    zbuf = np.full((height, width), np.inf, dtype=np.float64)
    ibuf = np.full((height, width), -1, dtype=np.int64)

    if len(scene) > 0:
        u, v, z, rx, ry = _project_gaussians(scene, intr, extr)
        front = z > Z_NEAR
        idx = np.nonzero(front)[0]
        u, v, z, rx, ry = u[idx], v[idx], z[idx], rx[idx], ry[idx]
        x0 = np.maximum(np.ceil(u - rx), 0.0).astype(np.int64)
        x1 = np.minimum(np.floor(u + rx), width - 1).astype(np.int64)
        y0 = np.maximum(np.ceil(v - ry), 0.0).astype(np.int64)
        y1 = np.minimum(np.floor(v + ry), height - 1).astype(np.int64)
        if frustum_culling:
            on_screen = (x1 >= x0) & (y1 >= y0)
            sel = np.nonzero(on_screen)[0]
            idx, u, v, z = idx[sel], u[sel], v[sel], z[sel]
            rx, ry, x0, x1, y0, y1 = rx[sel], ry[sel], x0[sel], x1[sel], y0[sel], y1[sel]
        tiles_x = (width + TILE - 1) // TILE
        tiles_y = (height + TILE - 1) // TILE
        counts = np.zeros(tiles_x * tiles_y, dtype=np.int64)
        total = _bin_counts(x0, x1, y0, y1, tiles_x, counts)
        offsets = np.zeros(tiles_x * tiles_y + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        entries = np.empty(total, dtype=np.int64)
        _bin_fill(x0, x1, y0, y1, tiles_x, offsets[:-1], entries)
        _raster_tiles(
            u, v, z, rx, ry, x0, x1, y0, y1, offsets, entries,
            tiles_x, tiles_y, width, height, zbuf, ibuf,
        )
        # local winner slots -> original Gaussian indices
        hit = ibuf >= 0
        ibuf[hit] = idx[ibuf[hit]]

    hit_mask = ibuf >= 0
    rgb = np.empty((height, width, 3), dtype=np.float32)
    rgb[:] = bg
    if hit_mask.any():
        rgb[hit_mask] = scene.colors[ibuf[hit_mask]]
    return RenderTarget(rgb=rgb, depth=zbuf, hit_mask=hit_mask, background=bg)


def render_rig(
    scene: GaussianScene,
    rig: CameraRig,
    background: Sequence[float] = (0.0, 0.0, 0.0),
    frustum_culling: bool = True,
) -> list[RenderTarget]:
    """Render every camera of the rig; identical to per-camera render calls."""
    return [
        render(scene, cam.intrinsics, cam.extrinsics, background, frustum_culling)
        for cam in rig
    ]
