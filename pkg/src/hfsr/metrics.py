"""PSNR and benchmark reports."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np


def psnr(reference, candidate, max_value: float = 1.0) -> float:
    """``10 log10(MAX^2 / MSE)`` over all pixels; ``inf`` for identical inputs."""
    ref = np.asarray(reference, dtype=np.float64)
    cand = np.asarray(candidate, dtype=np.float64)
    if ref.shape != cand.shape:
        raise ValueError(f"shape mismatch: {ref.shape} vs {cand.shape}")
    mse = float(np.mean((ref - cand) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(max_value * max_value / mse)


@dataclass
class EvalReport:
    """PSNR (dB) per image and method, in insertion order."""

    methods: list[str]
    rows: list[tuple[str, dict]] = field(default_factory=list)

    def add(self, name: str, scores: dict) -> None:
        missing = set(self.methods) - set(scores)
        if missing:
            raise ValueError(f"missing scores for {sorted(missing)}")
        self.rows.append((name, {m: float(scores[m]) for m in self.methods}))

    def score(self, name: str, method: str) -> float:
        for n, s in self.rows:
            if n == name:
                return s[method]
        raise KeyError(name)

    def means(self) -> dict:
        if not self.rows:
            return {m: math.nan for m in self.methods}
        return {m: float(np.mean([s[m] for _, s in self.rows])) for m in self.methods}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["image"] + self.methods)
        for name, s in self.rows:
            w.writerow([name] + [f"{s[m]:.4f}" for m in self.methods])
        means = self.means()
        w.writerow(["mean"] + [f"{means[m]:.4f}" for m in self.methods])
        return buf.getvalue()

    def to_table(self) -> str:
        """Methods as rows and images as columns, two decimals."""
        names = [n for n, _ in self.rows] + ["mean"]
        means = self.means()
        cols = [[s[m] for _, s in self.rows] + [means[m]] for m in self.methods]
        label_w = max(len(m) for m in self.methods + ["PSNR (dB)"])
        widths = [max(len(n), 6) for n in names]
        lines = [" | ".join(["PSNR (dB)".ljust(label_w)] + [n.rjust(w) for n, w in zip(names, widths)])]
        lines.append("-+-".join(["-" * label_w] + ["-" * w for w in widths]))
        for m, vals in zip(self.methods, cols):
            lines.append(" | ".join([m.ljust(label_w)] + [f"{v:.2f}".rjust(w) for v, w in zip(vals, widths)]))
        return "\n".join(lines) + "\n"
