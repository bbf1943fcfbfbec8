"""
Upscaling an image
==================

Colour images are converted to YCbCr; the luminance plane is super-resolved
patch by patch and the chroma planes are upscaled with bicubic interpolation.
"""
import time
from pathlib import Path

import numpy as np

from hfsr import SRConfig, build_dictionary, psnr, super_resolve_rgb
from hfsr.benchmark import degrade
from hfsr.image import luma, read_rgb, upsample_bicubic, write_rgb

ROOT = Path(__file__).resolve().parents[1]
OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

hr = read_rgb(ROOT / "data" / "standins" / "chelsea.png")
lr = degrade(hr, 2)
write_rgb(OUT / "chelsea_lr.png", lr)

d = build_dictionary()
t0 = time.perf_counter()
sr = super_resolve_rgb(lr, d, SRConfig())
print("super-resolved %dx%d -> %dx%d in %.1f s" % (lr.shape[1], lr.shape[0], sr.shape[1], sr.shape[0],
                                                  time.perf_counter() - t0))
write_rgb(OUT / "chelsea_hfsr.png", sr)

bic = np.stack([upsample_bicubic(lr[..., c], 2) for c in range(3)], -1)
bic = np.clip(np.rint(bic), 0, 255).astype(np.uint8)
write_rgb(OUT / "chelsea_bicubic.png", bic)

# scores on Y, the usual convention
print("PSNR (Y)  bicubic %.2f dB   hfsr %.2f dB" % (psnr(luma(hr), luma(bic)), psnr(luma(hr), luma(sr))))

# the same thing from the shell:
#   hfsr upscale demos/out/chelsea_lr.png demos/out/chelsea_cli.png --scale 2
