"""Flat ``key = value`` configuration covering SRConfig and GridSpec.

Example file::

    # comments and blank lines are ignored
    lambda1 = 1e-4
    refinement_mode = conventional
    scale_schedule = 7/6:1, 8/6:1, 2:2
    ahf_xi = 0.005, 0.05
"""
from __future__ import annotations

import os
from dataclasses import fields, replace
from fractions import Fraction
from pathlib import Path

from .dictionary import GridSpec
from .pipeline import SRConfig, default_schedule

ENV_VAR = "HFSR_CONFIG"

SR_KEYS = tuple(f.name for f in fields(SRConfig))
GRID_KEYS = tuple(f.name for f in fields(GridSpec))


class ConfigError(ValueError):
    """Unknown key or unparsable value."""


def _number(text: str) -> float:
    text = text.strip()
    try:
        return float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def _items(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_schedule(text: str) -> tuple:
    """``"7/6:1, 8/6:1, 2:2"`` -> ``((7/6, 1), (8/6, 1), (2.0, 2))``."""
    out = []
    for item in _items(text):
        scale, sep, iters = item.partition(":")
        if not sep:
            raise ConfigError(f"schedule entry {item!r} must look like scale:iterations")
        try:
            n = int(iters)
        except ValueError:
            raise ConfigError(f"iteration count {iters!r} is not an integer") from None
        out.append((_number(scale), n))
    return tuple(out)


def format_schedule(schedule) -> str:
    return ", ".join(f"{s!r}:{n}" for s, n in schedule)


def _convert(key: str, text: str, default):
    if key == "scale_schedule":
        return parse_schedule(text)
    if key == "families":
        return tuple(_items(text))
    if isinstance(default, tuple):
        return tuple(_number(t) for t in _items(text))
    if isinstance(default, bool):
        return text.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        v = _number(text)
        if v != int(v):
            raise ConfigError(f"{key} must be an integer, got {text!r}")
        return int(v)
    if isinstance(default, float):
        return _number(text)
    return text.strip()


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        values[key.strip()] = value.strip()
    return values


def resolve_config_path(path=None):
    """Explicit path first, then ``$HFSR_CONFIG``, else None."""
    if path:
        return path
    return os.environ.get(ENV_VAR) or None


def build_configs(values: dict[str, str], base_sr: SRConfig | None = None,
                  base_grid: GridSpec | None = None) -> tuple[SRConfig, GridSpec]:
    """Apply string overrides on top of the defaults.

    If the upscale factor or patch size changes and no schedule is given, the
    schedule is regenerated for the new geometry.
    """
    base_sr = SRConfig() if base_sr is None else base_sr
    base_grid = GridSpec() if base_grid is None else base_grid
    sr_kw, grid_kw = {}, {}
    for key, text in values.items():
        if key in SR_KEYS:
            sr_kw[key] = _convert(key, text, getattr(base_sr, key))
        elif key in GRID_KEYS:
            grid_kw[key] = _convert(key, text, getattr(base_grid, key))
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "scale_schedule" not in sr_kw and ({"upscale", "patch_w"} & sr_kw.keys()):
        sr_kw["scale_schedule"] = default_schedule(sr_kw.get("patch_w", base_sr.patch_w),
                                                   sr_kw.get("upscale", base_sr.upscale))
    try:
        return replace(base_sr, **sr_kw), replace(base_grid, **grid_kw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def dump_config(sr: SRConfig, grid: GridSpec) -> str:
    """Serialise both configs in the file format (round-trips through build_configs)."""
    lines = []
    for obj in (sr, grid):
        for f in fields(obj):
            v = getattr(obj, f.name)
            if f.name == "scale_schedule":
                text = format_schedule(v)
            elif isinstance(v, tuple):
                text = ", ".join(str(x) if isinstance(x, str) else repr(float(x)) for x in v)
            else:
                text = repr(v) if isinstance(v, float) else str(v)
            lines.append(f"{f.name} = {text}")
    return "\n".join(lines) + "\n"
