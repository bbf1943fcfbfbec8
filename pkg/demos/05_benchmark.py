"""
Benchmark harness
=================

Runs the x2 benchmark on a directory of ground-truth images.  With Set14 in
place (``$HFSR_SET14_DIR`` or ``data/Set14``) the scores are also set against
the published table; otherwise the bundled stand-ins are used.
"""
import os
import sys
from pathlib import Path

from hfsr.benchmark import compare_to_reference, run_benchmark, write_reports

ROOT = Path(__file__).resolve().parents[1]
OUT = Path(__file__).parent / "out"

dataset = os.environ.get("HFSR_SET14_DIR") or ROOT / "data" / "Set14"
if not Path(dataset).is_dir():
    print("Set14 not found, using the stand-in images (no published scores)")
    dataset = ROOT / "data" / "standins"

methods = ["nearest", "bicubic", "hfsr-conv", "hfsr-multi"]
report, manifest = run_benchmark(dataset, methods, log=lambda s: print(s, file=sys.stderr))
print(report.to_table())
print("written:", *write_reports(report, manifest, OUT / "benchmark"))

for m in methods:
    rows = compare_to_reference(report, m)
    if rows:
        diffs = [ours - ref for ours, ref in rows.values()]
        print(f"{m:>10}: mean difference to published {sum(diffs) / len(diffs):+.2f} dB over {len(rows)} images")
