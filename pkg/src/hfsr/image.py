"""Pixel containers, colour conversion, patch handling and resampling.

Planes are plain 2-D ``float64`` arrays of shape ``(height, width)``; RGB
images are ``uint8`` arrays of shape ``(height, width, 3)``.  Inside the
super-resolution pipeline intensities live on a ``[0, 1]`` scale.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

# full-range BT.601
_RGB_TO_YCBCR = np.array([
    [0.299, 0.587, 0.114],
    [-0.168736, -0.331264, 0.5],
    [0.5, -0.418688, -0.081312],
])
_YCBCR_TO_RGB = np.linalg.inv(_RGB_TO_YCBCR)
_CHROMA_OFFSET = np.array([0.0, 128.0, 128.0])


def as_plane(plane) -> np.ndarray:
    """Validate and return ``plane`` as a finite 2-D float64 array."""
    arr = np.asarray(plane, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D plane, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("plane contains NaN or Inf")
    return arr


def as_rgb(img) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"expected an (H, W, 3) RGB image, got shape {arr.shape}")
    return arr


# ---------------------------------------------------------------------------
# colour
# ---------------------------------------------------------------------------

def rgb_to_ycbcr(img) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full-range BT.601 RGB -> (Y, Cb, Cr), each on the 0..255 scale.

    The planes are returned as reals, not re-quantized.
    """
    rgb = as_rgb(img).astype(np.float64)
    ycc = rgb @ _RGB_TO_YCBCR.T + _CHROMA_OFFSET
    return ycc[..., 0].copy(), ycc[..., 1].copy(), ycc[..., 2].copy()


def ycbcr_to_rgb(y, cb, cr) -> np.ndarray:
    """Inverse of :func:`rgb_to_ycbcr`; returns a rounded, clipped uint8 image."""
    y, cb, cr = (np.asarray(p, dtype=np.float64) for p in (y, cb, cr))
    if not (y.shape == cb.shape == cr.shape):
        raise ValueError("Y, Cb and Cr planes must have equal shapes")
    ycc = np.stack([y, cb, cr], axis=-1) - _CHROMA_OFFSET
    rgb = ycc @ _YCBCR_TO_RGB.T
    return np.clip(np.rint(rgb), 0, 255).astype(np.uint8)


def luma(img) -> np.ndarray:
    """Y plane of an RGB image on the internal ``[0, 1]`` scale."""
    return rgb_to_ycbcr(img)[0] / 255.0


# ---------------------------------------------------------------------------
# patches
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PatchView:
    """A rectangular window of a plane, flattened row-major (index ``i*w + j``)."""

    origin: tuple[int, int]
    size: tuple[int, int]
    pixels: np.ndarray

    def as_2d(self) -> np.ndarray:
        return self.pixels.reshape(self.size)


def patch_starts(length: int, patch: int, overlap: int) -> list[int]:
    """Raster start offsets along one axis; the last one is clamped flush to the border."""
    if patch > length:
        raise ValueError(f"patch size {patch} exceeds plane extent {length}")
    if not 0 <= overlap < patch:
        raise ValueError(f"overlap must satisfy 0 <= overlap < patch, got {overlap}")
    stride = patch - overlap
    starts = list(range(0, length - patch + 1, stride))
    if starts[-1] != length - patch:
        starts.append(length - patch)
    return starts


def patch_origins(height: int, width: int, patch_w: int, overlap: int) -> list[tuple[int, int]]:
    rows = patch_starts(height, patch_w, overlap)
    cols = patch_starts(width, patch_w, overlap)
    return [(r, c) for r in rows for c in cols]


def extract_patches(plane, patch_w: int, overlap: int) -> list[PatchView]:
    """Square patches at stride ``patch_w - overlap`` in raster-scan order."""
    arr = as_plane(plane)
    h, w = arr.shape
    if patch_w > min(h, w):
        raise ValueError(f"plane {w}x{h} is smaller than one {patch_w}x{patch_w} patch")
    return [
        PatchView((r, c), (patch_w, patch_w), arr[r:r + patch_w, c:c + patch_w].ravel().copy())
        for r, c in patch_origins(h, w, patch_w, overlap)
    ]


def patch_matrix(plane, patch_w: int, overlap: int) -> tuple[np.ndarray, list[tuple[int, int]]]:
    """All patches stacked as rows of a ``(n_patches, patch_w**2)`` array, plus their origins."""
    arr = as_plane(plane)
    h, w = arr.shape
    if patch_w > min(h, w):
        raise ValueError(f"plane {w}x{h} is smaller than one {patch_w}x{patch_w} patch")
    origins = patch_origins(h, w, patch_w, overlap)
    out = np.empty((len(origins), patch_w * patch_w))
    for n, (r, c) in enumerate(origins):
        out[n] = arr[r:r + patch_w, c:c + patch_w].ravel()
    return out, origins


# ---------------------------------------------------------------------------
# resampling
# ---------------------------------------------------------------------------

def area_weights(n_in: int, n_out: int) -> np.ndarray:
    """``(n_out, n_in)`` matrix of 1-D area-averaging weights.

    Output cell ``o`` covers ``[o*r, (o+1)*r)`` of the input axis with
    ``r = n_in / n_out``; each weight is the covered fraction of an input cell
    divided by ``r``, so every row sums to one.
    """
    if n_out < 1 or n_in < 1:
        raise ValueError("dimensions must be positive")
    if n_out > n_in:
        raise ValueError(f"area averaging cannot enlarge ({n_in} -> {n_out})")
    ratio = n_in / n_out
    W = np.zeros((n_out, n_in))
    for o in range(n_out):
        lo, hi = o * ratio, (o + 1) * ratio
        for i in range(int(np.floor(lo)), min(n_in, int(np.ceil(hi)))):
            W[o, i] = max(0.0, min(hi, i + 1) - max(lo, i))
    return W / ratio


def downsample_matrix(in_h: int, in_w: int, out_h: int, out_w: int) -> np.ndarray:
    """Area downsampling as one matrix acting on row-major flattened planes."""
    return np.kron(area_weights(in_h, out_h), area_weights(in_w, out_w))


def downsample(plane, out_w: int, out_h: int) -> np.ndarray:
    """Area-weighted averaging to ``out_h x out_w`` (fractional ratios allowed)."""
    arr = as_plane(plane)
    if out_w < 1 or out_h < 1:
        raise ValueError("output dimensions must be positive")
    h, w = arr.shape
    if out_w > w or out_h > h:
        raise ValueError(f"cannot downsample {w}x{h} to larger {out_w}x{out_h}")
    return area_weights(h, out_h) @ arr @ area_weights(w, out_w).T


def keys_kernel(x, a: float = -0.5):
    """Keys cubic convolution kernel."""
    x = np.abs(np.asarray(x, dtype=np.float64))
    x2, x3 = x * x, x * x * x
    return np.where(
        x <= 1.0,
        (a + 2.0) * x3 - (a + 3.0) * x2 + 1.0,
        np.where(x < 2.0, a * x3 - 5.0 * a * x2 + 8.0 * a * x - 4.0 * a, 0.0),
    )


def bicubic_weights(n_in: int, n_out: int, antialias: bool = True) -> np.ndarray:
    """``(n_out, n_in)`` bicubic resampling matrix with pixel-centre alignment.

    Out-of-range taps are clamped to the nearest edge sample.  When shrinking
    and ``antialias`` is set, the kernel is stretched by the reduction factor
    and renormalised.
    """
    scale = n_out / n_in
    stretch = 1.0 / scale if (antialias and scale < 1.0) else 1.0
    half = 2.0 * stretch
    W = np.zeros((n_out, n_in))
    for o in range(n_out):
        x = (o + 0.5) / scale - 0.5
        taps = np.arange(int(np.floor(x - half)), int(np.ceil(x + half)) + 1)
        k = keys_kernel((x - taps) / stretch)
        if stretch != 1.0:
            k = k / k.sum()
        np.add.at(W[o], np.clip(taps, 0, n_in - 1), k)
    return W


def resize_bicubic(plane, out_w: int, out_h: int, antialias: bool = True) -> np.ndarray:
    arr = as_plane(plane)
    h, w = arr.shape
    return bicubic_weights(h, out_h, antialias) @ arr @ bicubic_weights(w, out_w, antialias).T


def upsample_bicubic(plane, factor: float) -> np.ndarray:
    """Keys (a = -0.5) bicubic enlargement to ``round(factor * size)``."""
    if factor < 1:
        raise ValueError(f"upsampling factor must be >= 1, got {factor}")
    arr = as_plane(plane)
    if factor == 1:
        return arr.copy()
    h, w = arr.shape
    return resize_bicubic(arr, int(round(factor * w)), int(round(factor * h)))


def upsample_nearest(plane, factor: int) -> np.ndarray:
    """Replicate every pixel into a ``factor x factor`` block."""
    if int(factor) != factor or factor < 1:
        raise ValueError(f"nearest-neighbour factor must be a positive integer, got {factor}")
    f = int(factor)
    return np.repeat(np.repeat(as_plane(plane), f, axis=0), f, axis=1)


def mod_crop(img: np.ndarray, scale: int) -> np.ndarray:
    """Crop height and width down to multiples of ``scale``."""
    h, w = img.shape[:2]
    return img[:h - h % scale, :w - w % scale]


# ---------------------------------------------------------------------------
# I/O
# ---------------------------------------------------------------------------

def read_rgb(path) -> np.ndarray:
    """Read a PNG/BMP (or any Pillow-readable) file as an ``(H, W, 3)`` uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_rgb(path, img) -> None:
    arr = as_rgb(img)
    if arr.dtype != np.uint8:
        arr = np.clip(np.rint(arr), 0, 255).astype(np.uint8)
    Image.fromarray(arr).save(Path(path))


def plane_to_rgb(plane) -> np.ndarray:
    """Grey ``[0, 1]`` plane replicated into a uint8 RGB image."""
    u8 = np.clip(np.rint(as_plane(plane) * 255.0), 0, 255).astype(np.uint8)
    return np.repeat(u8[..., None], 3, axis=2)
