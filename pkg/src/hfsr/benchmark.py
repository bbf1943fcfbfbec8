"""Set14-style benchmark: degrade, super-resolve, score on Y.

Published reference scores (x2, Y-channel PSNR in dB) are kept in
``REFERENCE`` for comparison; keys are lower-case image stems.
"""
from __future__ import annotations

import json
import time
import warnings
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import image
from .dictionary import Dictionary, GridSpec, build_dictionary
from .metrics import EvalReport, psnr
from .pipeline import SRConfig, super_resolve_plane

METHODS = ("nearest", "bicubic", "hfsr", "hfsr-conv", "hfsr-multi")
IMAGE_SUFFIXES = (".png", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff", ".ppm", ".pgm")

# nearest, bicubic, HFSR (fixed-scale refinement), HFSR (multi-scale)
_REF_COLUMNS = ("nearest", "bicubic", "hfsr-conv", "hfsr-multi")
_REF_ROWS = {
    "baboon": (24.21, 24.67, 25.12, 25.13),
    "barbara": (27.18, 27.94, 28.15, 28.16),
    "bridge": (27.94, 28.96, 29.50, 29.52),
    "coastguard": (28.19, 29.13, 29.47, 29.49),
    "comic": (24.61, 26.05, 26.88, 26.90),
    "face": (33.63, 34.88, 34.45, 34.46),
    "flowers": (28.41, 30.43, 31.27, 31.29),
    "foreman": (30.35, 32.66, 33.56, 33.57),
    "lenna": (32.35, 34.74, 35.07, 35.10),
    "man": (28.01, 29.27, 29.72, 29.74),
    "butterfly": (30.19, 32.97, 33.98, 34.00),
    "pepper": (31.09, 33.08, 33.67, 33.68),
    "ppt3": (25.05, 26.85, 27.46, 27.47),
    "zebra": (27.37, 30.68, 31.56, 31.59),
}
REFERENCE = {name: dict(zip(_REF_COLUMNS, row)) for name, row in _REF_ROWS.items()}

# file stems used by common Set14 distributions
ALIASES = {"monarch": "butterfly", "peppers": "pepper", "lena": "lenna"}


def reference_name(path_or_stem) -> str | None:
    """Canonical reference key for an image file, or None if it is not a Set14 image."""
    stem = Path(str(path_or_stem)).stem.lower()
    for suffix in ("_gt", "_hr", "-gt", "-hr"):
        if stem.endswith(suffix):
            stem = stem[: -len(suffix)]
    stem = ALIASES.get(stem, stem)
    return stem if stem in REFERENCE else None


@dataclass
class RunManifest:
    """Everything needed to reproduce a run, plus what it produced."""

    inputs: list[str]
    methods: list[str]
    config: dict
    grid: dict
    seed: int | None = None
    timings: dict = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    skipped: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        d = asdict(self)
        d["config"] = {k: (list(map(list, v)) if k == "scale_schedule" else v)
                       for k, v in d["config"].items()}
        return json.dumps(d, indent=2, default=list) + "\n"


def list_images(dataset_dir) -> list[Path]:
    root = Path(dataset_dir)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    files = sorted(p for p in root.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file())
    if not files:
        raise FileNotFoundError(f"no images in {root}")
    return files


def degrade(hr_rgb, scale: int) -> np.ndarray:
    """Keys-bicubic (antialiased) shrink of each RGB channel by ``scale``, re-quantized to uint8.

    ``hr_rgb`` must already be mod-cropped.
    """
    hr = image.as_rgb(hr_rgb)
    h, w = hr.shape[:2]
    if h % scale or w % scale:
        raise ValueError(f"{w}x{h} is not divisible by {scale}; mod_crop first")
    lr = np.stack([image.resize_bicubic(hr[..., c].astype(np.float64), w // scale, h // scale)
                   for c in range(3)], axis=-1)
    return np.clip(np.rint(lr), 0, 255).astype(np.uint8)


def method_config(method: str, config: SRConfig) -> SRConfig:
    if method == "hfsr-conv":
        return replace(config, refinement_mode="conventional")
    if method == "hfsr-multi":
        return replace(config, refinement_mode="multi_scale")
    return config


def upscale_y(method: str, lr_y, scale: int, dictionary: Dictionary | None,
              config: SRConfig) -> np.ndarray:
    """One method applied to a ``[0, 1]`` luminance plane, clamped to ``[0, 1]``."""
    if method == "nearest":
        out = image.upsample_nearest(lr_y, scale)
    elif method == "bicubic":
        out = image.upsample_bicubic(lr_y, scale)
    elif method in ("hfsr", "hfsr-conv", "hfsr-multi"):
        if dictionary is None:
            raise ValueError("hfsr methods need a dictionary")
        out = super_resolve_plane(lr_y, dictionary, method_config(method, config))
    else:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    return np.clip(out, 0.0, 1.0)


def evaluate_image(hr_rgb, methods, scale: int, dictionary, config: SRConfig):
    """Scores of every method on one ground-truth image, plus the upscaled Y planes."""
    hr = image.mod_crop(image.as_rgb(hr_rgb), scale)
    gt_y = image.luma(hr)
    lr_y = image.luma(degrade(hr, scale))
    scores, planes = {}, {}
    for m in methods:
        planes[m] = upscale_y(m, lr_y, scale, dictionary, config)
        scores[m] = psnr(gt_y, planes[m])
    return scores, planes


def run_benchmark(dataset_dir, methods=("nearest", "bicubic", "hfsr"), config: SRConfig | None = None,
                  grid: GridSpec | None = None, output_dir=None, seed: int | None = None,
                  log=None) -> tuple[EvalReport, RunManifest]:
    """Score ``methods`` on every readable image of ``dataset_dir`` (sorted by file name)."""
    config = SRConfig() if config is None else config
    grid = GridSpec() if grid is None else grid
    scale = int(round(config.upscale))
    if abs(config.upscale - scale) > 1e-12:
        raise ValueError("benchmarks need an integer upscale factor")
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {METHODS}")
    files = list_images(dataset_dir)
    dictionary = build_dictionary(grid, config.patch_w) if any(m.startswith("hfsr") for m in methods) else None
    report = EvalReport(methods)
    manifest = RunManifest([str(f) for f in files], methods, config.as_dict(), asdict(grid), seed)
    out_dir = Path(output_dir) if output_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    for f in files:
        try:
            hr = image.read_rgb(f)
        except Exception as exc:  # Pillow raises a zoo of types
            warnings.warn(f"skipping unreadable image {f}: {exc}")
            manifest.skipped.append(str(f))
            continue
        t0 = time.perf_counter()
        scores, planes = evaluate_image(hr, methods, scale, dictionary, config)
        manifest.timings[f.stem] = time.perf_counter() - t0
        report.add(f.stem, scores)
        if log:
            log(f"{f.stem}: " + ", ".join(f"{m} {scores[m]:.2f}" for m in methods)
                + f" ({manifest.timings[f.stem]:.1f} s)")
        if out_dir:
            for m, plane in planes.items():
                p = out_dir / f"{f.stem}_{m}.png"
                image.write_rgb(p, image.plane_to_rgb(plane))
                manifest.outputs.append(str(p))
    if not report.rows:
        raise FileNotFoundError(f"no readable images in {dataset_dir}")
    return report, manifest


def write_reports(report: EvalReport, manifest: RunManifest, prefix) -> list[Path]:
    """``<prefix>.csv``, ``<prefix>.txt`` and ``<prefix>.json`` (manifest)."""
    prefix = Path(prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    paths = [prefix.with_name(prefix.name + ext) for ext in (".csv", ".txt", ".json")]
    manifest.outputs.extend(str(p) for p in paths)
    paths[0].write_text(report.to_csv())
    paths[1].write_text(report.to_table())
    paths[2].write_text(manifest.to_json())
    return paths


def compare_to_reference(report: EvalReport, method: str, ref_column: str | None = None) -> dict:
    """``{image: (ours, published)}`` for images that have a published score."""
    ref_column = ref_column or method
    out = {}
    for name, scores in report.rows:
        key = reference_name(name)
        if key is not None and ref_column in REFERENCE[key]:
            out[key] = (scores[method], REFERENCE[key][ref_column])
    return out
