"""Feature modulation pipeline on dense C x H x W tensors: multiply by the
inverse-square-focal map, add a ReLU(conv3x3) embedding of the mixed ground/ray
priors, then concatenate the raw prior stack back onto the result."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch, WeightDimMismatch
from .priors import PriorMapSet

MIXTURE_CHANNELS = 8  # ground depth + gradient + 6 ray channels
KERNEL_SIZE = 3

_WEIGHTS_MAGIC = b"SFMW"
_WEIGHTS_VERSION = 1


@dataclass(frozen=True)
class ProjectorWeights:
    """3x3 convolution weights projecting the 8-channel prior mixture to C_out."""

    kernel: np.ndarray  # (C_out, 8, 3, 3) float32
    bias: np.ndarray  # (C_out,) float32

    def __post_init__(self) -> None:
        k = np.asarray(self.kernel, dtype=np.float32)
        b = np.asarray(self.bias, dtype=np.float32)
        if k.ndim != 4 or k.shape[1] != MIXTURE_CHANNELS or k.shape[2:] != (KERNEL_SIZE, KERNEL_SIZE):
            raise WeightDimMismatch(
                f"kernel must be (C_out, {MIXTURE_CHANNELS}, {KERNEL_SIZE}, {KERNEL_SIZE}), got {k.shape}"
            )
        if b.shape != (k.shape[0],):
            raise WeightDimMismatch(f"bias shape {b.shape} != ({k.shape[0]},)")
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(b))):
            raise WeightDimMismatch("weights must be finite")
        k.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "kernel", k)
        object.__setattr__(self, "bias", b)

    @property
    def out_channels(self) -> int:
        return self.kernel.shape[0]


def xavier_projector_weights(out_channels: int, seed: int = 0) -> ProjectorWeights:
    """Deterministic Xavier-uniform weights (zero bias) for untrained pipelines."""
    fan_in = MIXTURE_CHANNELS * KERNEL_SIZE * KERNEL_SIZE
    fan_out = out_channels * KERNEL_SIZE * KERNEL_SIZE
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    rng = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, 0x5F3759DF]))
    kernel = rng.uniform(
        -bound, bound, size=(out_channels, MIXTURE_CHANNELS, KERNEL_SIZE, KERNEL_SIZE)
    ).astype(np.float32)
    bias = np.zeros(out_channels, dtype=np.float32)
    return ProjectorWeights(kernel=kernel, bias=bias)


def save_projector_weights(path: str | Path, weights: ProjectorWeights) -> None:
    """Binary layout: magic 'SFMW', uint32 version, uint32 C_out, then
    float32 kernel and bias, all little-endian."""
    with open(path, "wb") as fh:
        fh.write(_WEIGHTS_MAGIC)
        fh.write(struct.pack("<II", _WEIGHTS_VERSION, weights.out_channels))
        fh.write(weights.kernel.astype("<f4").tobytes())
        fh.write(weights.bias.astype("<f4").tobytes())


def load_projector_weights(path: str | Path) -> ProjectorWeights:
    raw = Path(path).read_bytes()
    if raw[:4] != _WEIGHTS_MAGIC:
        raise WeightDimMismatch(f"{path}: bad magic {raw[:4]!r}")
    version, c_out = struct.unpack_from("<II", raw, 4)
    if version != _WEIGHTS_VERSION:
        raise WeightDimMismatch(f"{path}: unsupported version {version}")
    k_count = c_out * MIXTURE_CHANNELS * KERNEL_SIZE * KERNEL_SIZE
    expected = 12 + 4 * (k_count + c_out)
    if len(raw) != expected:
        raise WeightDimMismatch(f"{path}: size {len(raw)} != expected {expected}")
    kernel = np.frombuffer(raw, dtype="<f4", count=k_count, offset=12).reshape(
        c_out, MIXTURE_CHANNELS, KERNEL_SIZE, KERNEL_SIZE
    )
    bias = np.frombuffer(raw, dtype="<f4", count=c_out, offset=12 + 4 * k_count)
    return ProjectorWeights(kernel=kernel.copy(), bias=bias.copy())


def _require_chw(name: str, arr: np.ndarray) -> np.ndarray:
    a = np.asarray(arr)
    if a.ndim != 3:
        raise ShapeMismatch(f"{name} must be (C, H, W), got shape {a.shape}")
    return a


def modulate_focal(feature: np.ndarray, inverse_focal: np.ndarray) -> np.ndarray:
    """Broadcast-multiply the feature tensor by the 1-channel 1/f^2 map."""
    f = _require_chw("feature", feature)
    m = _require_chw("inverse_focal", inverse_focal)
    if m.shape[0] != 1 or m.shape[1:] != f.shape[1:]:
        raise ShapeMismatch(f"modulator {m.shape} does not match feature {f.shape}")
    return f * m


def conv3x3_same(inputs: np.ndarray, weights: ProjectorWeights) -> np.ndarray:
    """Stride-1, zero-padded 3x3 convolution producing (C_out, H, W)."""
    x = _require_chw("inputs", inputs)
    if x.shape[0] != weights.kernel.shape[1]:
        raise WeightDimMismatch(
            f"input has {x.shape[0]} channels, kernel expects {weights.kernel.shape[1]}"
        )
    c_in, h, w = x.shape
    pad = KERNEL_SIZE // 2
    xp = np.zeros((c_in, h + 2 * pad, w + 2 * pad), dtype=np.float64)
    xp[:, pad : pad + h, pad : pad + w] = x
    windows = np.lib.stride_tricks.sliding_window_view(xp, (KERNEL_SIZE, KERNEL_SIZE), axis=(1, 2))
    # windows: (C_in, H, W, 3, 3); kernel: (C_out, C_in, 3, 3)
    out = np.einsum("ihwkl,oikl->ohw", windows, weights.kernel.astype(np.float64), optimize=True)
    return out + weights.bias.astype(np.float64)[:, None, None]


def spatial_embed(
    feature: np.ndarray, priors: PriorMapSet, weights: ProjectorWeights
) -> np.ndarray:
    """Add the ReLU(conv3x3(prior mixture)) embedding onto the modulated feature.

    Invalid-mask pixels contribute zeros to the projector input.
    """
    f = _require_chw("feature", feature)
    if f.shape[1:] != (priors.height, priors.width):
        raise ShapeMismatch(
            f"feature {f.shape[1:]} does not match priors {(priors.height, priors.width)}"
        )
    if weights.out_channels != f.shape[0]:
        raise WeightDimMismatch(
            f"projector emits {weights.out_channels} channels, feature has {f.shape[0]}"
        )
    embedding = np.maximum(conv3x3_same(priors.mixture(), weights), 0.0)
    return f + embedding


def assemble_spatial_feature(feature: np.ndarray, priors: PriorMapSet) -> np.ndarray:
    """Concatenate the 9-channel raw prior stack ahead of the feature channels."""
    f = _require_chw("feature", feature)
    if f.shape[1:] != (priors.height, priors.width):
        raise ShapeMismatch(
            f"feature {f.shape[1:]} does not match priors {(priors.height, priors.width)}"
        )
    return np.concatenate([priors.stack(), f], axis=0)
