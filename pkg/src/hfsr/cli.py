"""``hfsr`` command line: upscale, benchmark, dict.

Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import benchmark, config as cfg, image
from .dictionary import FAMILIES, EmptyDictionaryError, build_dictionary, save_dictionary
from .pipeline import super_resolve_plane

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3

_REFINE = {"multi": "multi_scale", "conv": "conventional", "none": "none"}
_WEIGHT = {"inverse": "inverse_loss", "literal": "literal_loss", "uniform": "uniform"}


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("configuration (flags override the config file)")
    g.add_argument("--config", help="flat key=value file (default: $HFSR_CONFIG)")
    g.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config field; repeatable")
    g.add_argument("--scale", type=float)
    g.add_argument("--patch", type=int)
    g.add_argument("--overlap", type=int)
    g.add_argument("--lambda1", type=float)
    g.add_argument("--lambda2", type=float)
    g.add_argument("--refine", choices=sorted(_REFINE))
    g.add_argument("--weighting", choices=sorted(_WEIGHT))
    g.add_argument("--threads", type=int, help="numba worker threads")
    g.add_argument("--seed", type=int, help="reserved; the pipeline is deterministic")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hfsr", description="Training-free sparse-coding super-resolution.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    up = sub.add_parser("upscale", help="upscale one image")
    up.add_argument("input")
    up.add_argument("output")
    up.add_argument("--method", choices=("hfsr", "bicubic", "nearest"), default="hfsr")
    _common(up)

    bench = sub.add_parser("benchmark", help="score methods on a directory of HR images")
    bench.add_argument("dataset_dir")
    bench.add_argument("--methods", default="nearest,bicubic,hfsr",
                       help=f"comma-separated subset of {','.join(benchmark.METHODS)}")
    bench.add_argument("--report", default="hfsr_report",
                       help="output prefix; writes PREFIX.csv, PREFIX.txt and PREFIX.json")
    bench.add_argument("--save-images", metavar="DIR", help="also write every upscaled Y plane")
    _common(bench)

    d = sub.add_parser("dict", help="build the dictionary, print counts, export the table")
    d.add_argument("--export", metavar="PATH", help="parameter table output path")
    d.add_argument("--threshold", type=float, help="norm filter threshold")
    d.add_argument("--families", help=f"comma-separated subset of {','.join(FAMILIES)}")
    _common(d)
    return parser


def resolve_configs(args):
    """Defaults, then the config file, then ``--set``, then the dedicated flags."""
    values = {}
    path = cfg.resolve_config_path(args.config)
    if path:
        try:
            values.update(cfg.read_config_file(path))
        except OSError as exc:
            raise OSError(f"cannot read config file {path}: {exc}") from exc
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        values[key.strip()] = value.strip()
    flags = {
        "upscale": args.scale, "patch_w": args.patch, "overlap": args.overlap,
        "lambda1": args.lambda1, "lambda2": args.lambda2,
        "refinement_mode": _REFINE.get(args.refine), "weighting_mode": _WEIGHT.get(args.weighting),
        "norm_threshold": getattr(args, "threshold", None), "families": getattr(args, "families", None),
    }
    for key, v in flags.items():
        if v is not None:
            values[key] = repr(v) if isinstance(v, float) else str(v)
    try:
        return cfg.build_configs(values)
    except cfg.ConfigError as exc:
        raise UsageError(str(exc)) from None


def _set_threads(n):
    if n is None:
        return
    import numba
    if n < 1:
        raise UsageError("--threads must be >= 1")
    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def cmd_upscale(args) -> int:
    sr, grid = resolve_configs(args)
    _set_threads(args.threads)
    src = Path(args.input)
    if not src.is_file():
        raise OSError(f"input file not found: {src}")
    img = image.read_rgb(src)
    t0 = time.perf_counter()
    if args.method == "nearest":
        if sr.upscale != int(sr.upscale):
            raise UsageError("nearest needs an integer --scale")
        out = np.stack([image.upsample_nearest(img[..., c], int(sr.upscale)) for c in range(3)], -1)
        out = out.astype(np.uint8)
    elif args.method == "bicubic":
        out = np.stack([image.upsample_bicubic(img[..., c], sr.upscale) for c in range(3)], -1)
        out = np.clip(np.rint(out), 0, 255).astype(np.uint8)
    else:
        dictionary = build_dictionary(grid, sr.patch_w)
        y, cb, cr = image.rgb_to_ycbcr(img)
        y_hr, results = super_resolve_plane(y / 255.0, dictionary, sr, return_patches=True)
        losses = np.array([r.loss for r in results])
        if not (np.all(np.isfinite(y_hr)) and np.all(np.isfinite(losses))):
            raise NumericalError("non-finite values in the reconstruction")
        out = image.ycbcr_to_rgb(y_hr * 255.0, image.upsample_bicubic(cb, sr.upscale),
                                 image.upsample_bicubic(cr, sr.upscale))
        print(f"dictionary atoms: {len(dictionary)}")
        print(f"patches: {len(results)}  mean patch loss: {losses.mean():.6g}")
    elapsed = time.perf_counter() - t0
    image.write_rgb(args.output, out)
    h, w = img.shape[:2]
    print(f"{args.method}: {w}x{h} -> {out.shape[1]}x{out.shape[0]} in {elapsed:.2f} s -> {args.output}")
    return EXIT_OK


def cmd_benchmark(args) -> int:
    sr, grid = resolve_configs(args)
    _set_threads(args.threads)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in methods if m not in benchmark.METHODS]
    if bad or not methods:
        raise UsageError(f"unknown methods {bad}; choose from {','.join(benchmark.METHODS)}")
    if sr.upscale != int(sr.upscale):
        raise UsageError("benchmark needs an integer --scale")
    report, manifest = benchmark.run_benchmark(
        args.dataset_dir, methods, sr, grid, output_dir=args.save_images, seed=args.seed,
        log=lambda s: print(s, file=sys.stderr))
    if not all(np.isfinite(v) or v == np.inf for _, s in report.rows for v in s.values()):
        raise NumericalError("non-finite PSNR")
    paths = benchmark.write_reports(report, manifest, args.report)
    sys.stdout.write(report.to_table())
    print("wrote " + ", ".join(str(p) for p in paths))
    return EXIT_OK


def cmd_dict(args) -> int:
    sr, grid = resolve_configs(args)
    d = build_dictionary(grid, sr.patch_w)
    print(f"patch: {d.patch_w}x{d.patch_h}  norm threshold: {grid.norm_threshold}")
    print(f"{'family':<8}{'pre':>6}{'post':>6}")
    for fam in d.pre_filter:
        print(f"{fam:<8}{d.pre_filter[fam]:>6}{d.post_filter[fam]:>6}")
    print(f"{'total':<8}{sum(d.pre_filter.values()):>6}{sum(d.post_filter.values()):>6}")
    if args.export:
        save_dictionary(d, args.export)
        print(f"wrote {args.export}")
    return EXIT_OK


_COMMANDS = {"upscale": cmd_upscale, "benchmark": cmd_benchmark, "dict": cmd_dict}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, EmptyDictionaryError) as exc:
        print(f"hfsr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"hfsr: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError) as exc:
        # Pillow's UnidentifiedImageError is an OSError
        code = EXIT_USAGE if isinstance(exc, ValueError) else EXIT_IO
        print(f"hfsr: error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
