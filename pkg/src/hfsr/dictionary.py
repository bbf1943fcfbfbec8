"""Function-generated dictionary: AHF edges, oriented sines and DCT products.

Each atom is a closed-form function of patch-local coordinates ``(i, j)``
(``i`` = row, ``j`` = column, 0-based, origin at the top-left pixel).  Because
atoms are functions rather than stored pixels, the same atom can be rendered on
any grid; rendering at scale ``s`` samples the function at ``(i/s, j/s)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

AHF = "ahf"
SINE = "sine"
DCT = "dct"
FAMILIES = (AHF, SINE, DCT)

_FIELDS = {
    AHF: ("theta", "b", "xi"),
    SINE: ("theta", "a", "b"),
    DCT: ("a", "b"),
}

ALIGNMENTS = ("corner", "center")


class EmptyDictionaryError(ValueError):
    """Raised when the norm filter removes every candidate atom."""


@dataclass(frozen=True)
class AtomParams:
    """Parameters of one atom; only the fields of ``family`` are set."""

    family: str
    theta: float | None = None
    a: float | None = None
    b: float | None = None
    xi: float | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown atom family {self.family!r}")
        wanted = _FIELDS[self.family]
        for name in ("theta", "a", "b", "xi"):
            present = getattr(self, name) is not None
            if present != (name in wanted):
                raise ValueError(f"{self.family} atom: field {name!r} "
                                 f"{'missing' if not present else 'not allowed'}")
        if self.family == AHF and not self.xi > 0:
            raise ValueError("AHF smoothness xi must be > 0")

    @classmethod
    def ahf(cls, theta, b, xi):
        return cls(AHF, theta=float(theta), b=float(b), xi=float(xi))

    @classmethod
    def sine(cls, theta, a, b):
        return cls(SINE, theta=float(theta), a=float(a), b=float(b))

    @classmethod
    def dct(cls, a, b):
        return cls(DCT, a=float(a), b=float(b))


def eval_atom(params: AtomParams, i, j, patch_w: int, patch_h: int):
    """Evaluate the atom function at (broadcastable) coordinates ``(i, j)``."""
    i = np.asarray(i, dtype=np.float64)
    j = np.asarray(j, dtype=np.float64)
    if params.family == DCT:
        return (np.cos(math.pi * params.a * (i + 0.5) / patch_w)
                * np.cos(math.pi * params.b * (j + 0.5) / patch_h))
    proj = i * math.cos(params.theta) + j * math.sin(params.theta) + params.b
    if params.family == AHF:
        return np.arctan(proj / params.xi) / math.pi
    return np.sin(proj * params.a)


def sample_coords(n: int, scale: float, alignment: str = "corner") -> np.ndarray:
    """Low-resolution coordinates of the ``n`` samples of a grid at ``scale``.

    ``corner`` maps sample ``i`` to ``i/scale`` (top-left pixels coincide);
    ``center`` maps it to ``(i + 0.5)/scale - 0.5`` (pixel centres coincide).
    """
    idx = np.arange(n, dtype=np.float64)
    if alignment == "corner":
        return idx / scale
    if alignment == "center":
        return (idx + 0.5) / scale - 0.5
    raise ValueError(f"alignment must be one of {ALIGNMENTS}, got {alignment!r}")


def _raw_render(params: AtomParams, patch_w: int, patch_h: int, scale: float,
                alignment: str = "corner") -> np.ndarray:
    rows = int(round(patch_h * scale))
    cols = int(round(patch_w * scale))
    i = sample_coords(rows, scale, alignment)[:, None]
    j = sample_coords(cols, scale, alignment)[None, :]
    return np.broadcast_to(eval_atom(params, i, j, patch_w, patch_h), (rows, cols)).ravel()


@dataclass(frozen=True)
class GridSpec:
    """Parameter grids of the three atom families and the norm filter."""

    ahf_theta_count: int = 16
    ahf_b_min: float = -6.0
    ahf_b_max: float = 6.0
    ahf_b_count: int = 12
    ahf_xi: tuple[float, ...] = (0.005,)
    sine_theta_count: int = 6
    sine_b_values: tuple[float, ...] = (0, 1, 2, 3, 4, 5, 6)
    sine_a_values: tuple[float, ...] = (2.5, 2.25, 2.0)
    dct_a_values: tuple[float, ...] = (0, 1, 2, 3, 4, 5)
    dct_b_values: tuple[float, ...] = (0, 1, 2, 3, 4, 5)
    norm_threshold: float = 1.0
    families: tuple[str, ...] = FAMILIES

    def __post_init__(self):
        for name in ("ahf_theta_count", "ahf_b_count", "sine_theta_count"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("ahf_xi", "sine_b_values", "sine_a_values", "dct_a_values", "dct_b_values"):
            if len(getattr(self, name)) < 1:
                raise ValueError(f"{name} must not be empty")
        if any(x <= 0 for x in self.ahf_xi):
            raise ValueError("ahf_xi values must be > 0")
        if self.norm_threshold < 0:
            raise ValueError("norm_threshold must be >= 0")
        unknown = set(self.families) - set(FAMILIES)
        if unknown or not self.families:
            raise ValueError(f"families must be a non-empty subset of {FAMILIES}")

    def candidates(self, family: str) -> Iterator[AtomParams]:
        """Cartesian product of one family's grid, in a fixed order."""
        if family == AHF:
            thetas = 2 * math.pi * np.arange(self.ahf_theta_count) / self.ahf_theta_count
            offsets = np.linspace(self.ahf_b_min, self.ahf_b_max, self.ahf_b_count)
            for theta in thetas:
                for b in offsets:
                    for xi in self.ahf_xi:
                        yield AtomParams.ahf(theta, b, xi)
        elif family == SINE:
            thetas = math.pi * np.arange(self.sine_theta_count) / self.sine_theta_count
            for theta in thetas:
                for b in self.sine_b_values:
                    for a in self.sine_a_values:
                        yield AtomParams.sine(theta, a, b)
        elif family == DCT:
            for a in self.dct_a_values:
                for b in self.dct_b_values:
                    yield AtomParams.dct(a, b)
        else:
            raise ValueError(f"unknown family {family!r}")


@dataclass(frozen=True, eq=False)
class Dictionary:
    """Ordered atoms with the LR-render L2 norm of each one.

    Atom ``k`` is 0-based.  ``pre_filter`` and ``post_filter`` record per-family
    counts from :func:`build_dictionary` (empty for hand-built dictionaries).
    """

    atoms: tuple[AtomParams, ...]
    patch_w: int
    patch_h: int
    norm_factors: np.ndarray
    pre_filter: dict = field(default_factory=dict)
    post_filter: dict = field(default_factory=dict)

    def __post_init__(self):
        nf = np.asarray(self.norm_factors, dtype=np.float64)
        if len(self.atoms) < 1:
            raise EmptyDictionaryError("dictionary has no atoms")
        if nf.shape != (len(self.atoms),) or not np.all(nf > 0):
            raise ValueError("norm_factors must hold one positive value per atom")
        nf.setflags(write=False)
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "norm_factors", nf)

    def __len__(self) -> int:
        return len(self.atoms)

    @classmethod
    def from_atoms(cls, atoms: Sequence[AtomParams], patch_w: int = 6, patch_h: int | None = None):
        """Dictionary whose norm factors are computed from the scale-1 renders."""
        patch_h = patch_w if patch_h is None else patch_h
        norms = [np.linalg.norm(_raw_render(p, patch_w, patch_h, 1.0)) for p in atoms]
        return cls(tuple(atoms), patch_w, patch_h, np.array(norms))

    def render_atom(self, k: int, scale: float = 1.0, alignment: str = "corner") -> np.ndarray:
        return render_atom(self, k, scale, alignment)

    def matrix(self, scale: float = 1.0, alignment: str = "corner") -> np.ndarray:
        return render_dictionary_matrix(self, scale, alignment)

    def family_counts(self) -> dict:
        counts = {f: 0 for f in FAMILIES}
        for p in self.atoms:
            counts[p.family] += 1
        return counts


def render_atom(dictionary: Dictionary, k: int, scale: float = 1.0,
                alignment: str = "corner") -> np.ndarray:
    """Atom ``k`` rendered on a ``round(h*scale) x round(w*scale)`` grid, unit-norm at scale 1.

    The same divisor is applied at every scale.
    """
    if not 0 <= k < len(dictionary):
        raise IndexError(f"atom index {k} out of range for {len(dictionary)} atoms")
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    raw = _raw_render(dictionary.atoms[k], dictionary.patch_w, dictionary.patch_h, scale, alignment)
    return raw / dictionary.norm_factors[k]


def render_dictionary_matrix(dictionary: Dictionary, scale: float = 1.0,
                             alignment: str = "corner") -> np.ndarray:
    """Matrix whose column ``k`` is :func:`render_atom` of atom ``k``."""
    cols = [render_atom(dictionary, k, scale, alignment) for k in range(len(dictionary))]
    return np.stack(cols, axis=1)


def build_dictionary(spec: GridSpec | None = None, patch_w: int = 6,
                     patch_h: int | None = None) -> Dictionary:
    """Enumerate every family grid, drop atoms whose LR norm is below the threshold."""
    spec = GridSpec() if spec is None else spec
    patch_h = patch_w if patch_h is None else patch_h
    atoms, norms = [], []
    pre, post = {}, {}
    for family in FAMILIES:
        if family not in spec.families:
            continue
        pre[family] = post[family] = 0
        for params in spec.candidates(family):
            pre[family] += 1
            norm = float(np.linalg.norm(_raw_render(params, patch_w, patch_h, 1.0)))
            if norm < spec.norm_threshold or norm == 0.0:
                continue
            post[family] += 1
            atoms.append(params)
            norms.append(norm)
    if not atoms:
        raise EmptyDictionaryError(
            f"no atom has LR norm >= {spec.norm_threshold} ({sum(pre.values())} candidates)")
    return Dictionary(tuple(atoms), patch_w, patch_h, np.array(norms), pre, post)


# ---------------------------------------------------------------------------
# plain-text parameter table
# ---------------------------------------------------------------------------

_COLUMNS = ("family", "theta", "a", "b", "xi", "norm_factor")


def _fmt(v) -> str:
    return "-" if v is None else repr(float(v))


def save_dictionary(dictionary: Dictionary, path) -> None:
    """Write one atom per line: family, theta, a, b, xi, norm_factor (``-`` = unused)."""
    lines = [
        "# hfsr dictionary parameter table",
        f"# patch {dictionary.patch_w} {dictionary.patch_h}",
        "# " + " ".join(_COLUMNS),
    ]
    for p, nf in zip(dictionary.atoms, dictionary.norm_factors):
        lines.append(" ".join([p.family, _fmt(p.theta), _fmt(p.a), _fmt(p.b), _fmt(p.xi), _fmt(nf)]))
    Path(path).write_text("\n".join(lines) + "\n")


def load_dictionary(path) -> Dictionary:
    patch_w = patch_h = None
    atoms, norms = [], []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["patch"]:
                patch_w, patch_h = int(parts[1]), int(parts[2])
            continue
        parts = line.split()
        if len(parts) != len(_COLUMNS):
            raise ValueError(f"{path}:{lineno}: expected {len(_COLUMNS)} fields, got {len(parts)}")
        vals = [None if v == "-" else float(v) for v in parts[1:]]
        theta, a, b, xi, nf = vals
        atoms.append(AtomParams(parts[0], theta=theta, a=a, b=b, xi=xi))
        norms.append(nf)
    if patch_w is None:
        raise ValueError(f"{path}: missing '# patch W H' header")
    return Dictionary(tuple(atoms), patch_w, patch_h, np.array(norms))
