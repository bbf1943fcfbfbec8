#!/usr/bin/env python3
"""Unpack a Set14 archive into data/Set14 with canonical file names.

Set14 is not redistributed here (its licensing is unclear).  Point this
script at an archive or directory you already have, or at a URL you trust:

    python3 scripts/fetch_set14.py --source ~/Downloads/Set14.zip
    python3 scripts/fetch_set14.py --source https://<mirror>/Set14.zip

Only the 14 high-resolution images are kept (names such as ``baboon``,
``baboon_GT`` or ``img_001_SRF_2_HR`` are all recognised), converted to PNG.
"""
from __future__ import annotations

import argparse
import re
import sys
import tarfile
import tempfile
import urllib.request
import zipfile
from pathlib import Path

from PIL import Image

NAMES = ("baboon", "barbara", "bridge", "coastguard", "comic", "face", "flowers",
         "foreman", "lenna", "man", "monarch", "pepper", "ppt3", "zebra")
ALIASES = {"butterfly": "monarch", "peppers": "pepper", "lena": "lenna"}
# img_001 .. img_014 in SRF-style bundles follow the same alphabetical order
SRF_ORDER = NAMES

DEST = Path(__file__).resolve().parents[1] / "data" / "Set14"


def canonical(path: Path) -> str | None:
    stem = path.stem.lower()
    m = re.fullmatch(r"img_0*(\d+)_srf_\d+_hr", stem)
    if m:
        k = int(m.group(1)) - 1
        return SRF_ORDER[k] if 0 <= k < len(SRF_ORDER) else None
    if re.search(r"(_lr|lr_|_srf_\d+_lr|bicubic|_x\d)", stem):
        return None
    stem = re.sub(r"[_-](gt|hr)$", "", stem)
    stem = ALIASES.get(stem, stem)
    return stem if stem in NAMES else None


def unpack(source: str, workdir: Path) -> Path:
    if re.match(r"https?://", source):
        with urllib.request.urlopen(source, timeout=60) as r:
            blob = r.read()
        arch = workdir / "download"
        arch.write_bytes(blob)
        source = str(arch)
    src = Path(source).expanduser()
    if src.is_dir():
        return src
    out = workdir / "unpacked"
    if zipfile.is_zipfile(src):
        with zipfile.ZipFile(src) as z:
            z.extractall(out)
    elif tarfile.is_tarfile(src):
        with tarfile.open(src) as t:
            t.extractall(out, filter="data")
    else:
        raise SystemExit(f"{src}: not a directory, zip or tar archive")
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--source", required=True, help="archive path, directory or http(s) URL")
    ap.add_argument("--dest", default=str(DEST))
    args = ap.parse_args(argv)
    dest = Path(args.dest)
    dest.mkdir(parents=True, exist_ok=True)
    found = {}
    with tempfile.TemporaryDirectory() as tmp:
        root = unpack(args.source, Path(tmp))
        for p in sorted(root.rglob("*")):
            name = canonical(p) if p.is_file() else None
            if name and name not in found:
                with Image.open(p) as im:
                    im.convert("RGB").save(dest / f"{name}.png")
                found[name] = p.name
    for n in NAMES:
        print(f"{n:<11} {'<- ' + found[n] if n in found else 'MISSING'}")
    missing = [n for n in NAMES if n not in found]
    if missing:
        print(f"{len(missing)} image(s) missing", file=sys.stderr)
        return 1
    print(f"wrote 14 images to {dest}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
