"""File formats used at the CLI boundary: PFM float maps (one file per
channel, bottom-up scanlines per the format), PGM masks, PNG images, and the
manifest-based multi-channel "PFM stack" directory layout."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

PFM_LITTLE_ENDIAN_SCALE = -1.0


def write_pfm(path: str | Path, data: np.ndarray) -> None:
    """Write a single-channel (H, W) or color (H, W, 3) PFM, little-endian."""
    a = np.asarray(data, dtype="<f4")
    if a.ndim == 2:
        header = b"Pf"
        h, w = a.shape
    elif a.ndim == 3 and a.shape[2] == 3:
        header = b"PF"
        h, w = a.shape[:2]
    else:
        raise ValueError(f"PFM supports (H, W) or (H, W, 3), got {a.shape}")
    with open(path, "wb") as fh:
        fh.write(header + b"\n")
        fh.write(f"{w} {h}\n".encode("ascii"))
        fh.write(f"{PFM_LITTLE_ENDIAN_SCALE}\n".encode("ascii"))
        fh.write(np.flipud(a).tobytes())  # PFM scanlines run bottom to top


def read_pfm(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    parts = raw.split(b"\n", 3)
    if len(parts) < 4:
        raise ValueError(f"{path}: truncated PFM header")
    magic, dims, scale_s, payload = parts
    if magic not in (b"Pf", b"PF"):
        raise ValueError(f"{path}: bad PFM magic {magic!r}")
    w, h = (int(x) for x in dims.split())
    scale = float(scale_s)
    channels = 3 if magic == b"PF" else 1
    dtype = "<f4" if scale < 0 else ">f4"
    count = w * h * channels
    a = np.frombuffer(payload, dtype=dtype, count=count).astype(np.float32)
    shape = (h, w, 3) if channels == 3 else (h, w)
    return np.flipud(a.reshape(shape)).copy()


def write_pgm_mask(path: str | Path, mask: np.ndarray) -> None:
    """8-bit binary PGM: 255 where the mask is true, 0 elsewhere."""
    m = np.asarray(mask, dtype=bool)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got {m.shape}")
    h, w = m.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write((m.astype(np.uint8) * 255).tobytes())


def read_pgm_mask(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if not raw.startswith(b"P5"):
        raise ValueError(f"{path}: not a binary PGM")
    fields: list[bytes] = []
    pos = 2
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if raw[pos : pos + 1] == b"#":
            pos = raw.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        fields.append(raw[start:pos])
    w, h, maxval = (int(f) for f in fields)
    if maxval != 255:
        raise ValueError(f"{path}: expected maxval 255, got {maxval}")
    data = np.frombuffer(raw, dtype=np.uint8, count=w * h, offset=pos + 1)
    return (data.reshape(h, w) > 0).copy()


def unit_to_u8(values: np.ndarray) -> np.ndarray:
    """[0, 1] floats to uint8 by round-to-nearest."""
    return np.clip(np.rint(np.asarray(values, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def u8_to_unit(values: np.ndarray) -> np.ndarray:
    """uint8 to [0, 1] float32 (exact k/255 quantization grid)."""
    return np.asarray(values).astype(np.float32) / np.float32(255.0)


def write_png(path: str | Path, rgb: np.ndarray) -> None:
    """8-bit RGB PNG; float input in [0, 1] is quantized, uint8 passes through."""
    a = np.asarray(rgb)
    if a.dtype != np.uint8:
        a = unit_to_u8(a)
    if a.ndim != 3 or a.shape[2] != 3:
        raise ValueError(f"expected (H, W, 3) image, got {a.shape}")
    Image.fromarray(a, mode="RGB").save(path, format="PNG")


def read_png(path: str | Path) -> np.ndarray:
    with Image.open(path) as img:
        return np.asarray(img.convert("RGB"))


def write_pfm_stack(
    out_dir: str | Path,
    stack: np.ndarray,
    channel_names: list[str],
    extra_manifest: dict | None = None,
) -> Path:
    """Write a (C, H, W) array as one PFM per channel plus manifest.json."""
    a = np.asarray(stack)
    if a.ndim != 3 or a.shape[0] != len(channel_names):
        raise ValueError(f"stack {a.shape} does not match {len(channel_names)} channel names")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, name in enumerate(channel_names):
        fname = f"c{i:03d}_{name}.pfm"
        write_pfm(out / fname, a[i])
        files.append(fname)
    manifest = {
        "channels": list(channel_names),
        "files": files,
        "height": int(a.shape[1]),
        "width": int(a.shape[2]),
    }
    if extra_manifest:
        manifest.update(extra_manifest)
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return out


def read_pfm_stack(stack_dir: str | Path) -> tuple[np.ndarray, dict]:
    """Read a stack directory (manifest.json + per-channel PFMs) back to (C, H, W)."""
    d = Path(stack_dir)
    manifest = json.loads((d / "manifest.json").read_text())
    planes = [read_pfm(d / fname) for fname in manifest["files"]]
    return np.stack(planes, axis=0), manifest
