"""Patch coding, multi-scale refinement and loss-weighted reconstruction."""
from __future__ import annotations

import functools
import os
from dataclasses import dataclass, fields, replace

import numba
import numpy as np

from . import image
from .dictionary import ALIGNMENTS, Dictionary, render_dictionary_matrix
from .solver import METHODS, SparseCode, _solve_one, gram

DEFAULT_SCHEDULE = ((7 / 6, 1), (8 / 6, 1), (9 / 6, 1), (10 / 6, 1), (11 / 6, 0), (12 / 6, 2))
REFINEMENT_MODES = ("multi_scale", "conventional", "none")
WEIGHTING_MODES = ("inverse_loss", "literal_loss", "uniform")
RESIDUAL_MODES = ("cumulative", "telescoped")
CONVENTIONAL_ITERS = 6

# old system TBB builds trigger a noisy fallback warning; try OpenMP first
if "NUMBA_THREADING_LAYER_PRIORITY" not in os.environ:
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


@dataclass(frozen=True)
class SRConfig:
    """Hyperparameters of the super-resolution pipeline.

    ``hr_alignment`` selects how HR dictionary renders are sampled: ``center``
    keeps pixel centres of the LR and HR grids aligned (matching area
    averaging and bicubic resampling), ``corner`` samples the atom functions
    at ``(i/s, j/s)``.

    ``residual_mode`` picks how each refinement step forms its target:
    ``cumulative`` re-renders the whole running code at the current scale
    (``p - D Phi_s alpha``), ``telescoped`` subtracts only the previous
    correction from the previous residual.  With ``subtract_mean`` each LR
    patch is coded after removing its mean, which is added back to the HR
    patch.
    """

    patch_w: int = 6
    overlap: int = 4
    upscale: float = 2.0
    lambda1: float = 1e-4
    lambda2: float = 1e-4
    scale_schedule: tuple = DEFAULT_SCHEDULE
    refinement_mode: str = "multi_scale"
    weighting_mode: str = "inverse_loss"
    epsilon_weight: float = 1e-8
    tolerance: float = 1e-7
    max_iters: int = 1000
    solver_method: str = "homotopy"
    hr_alignment: str = "center"
    residual_mode: str = "cumulative"
    subtract_mean: bool = True

    def __post_init__(self):
        sched = tuple((float(s), int(n)) for s, n in self.scale_schedule)
        object.__setattr__(self, "scale_schedule", sched)
        if self.patch_w < 1:
            raise ValueError("patch_w must be >= 1")
        if not 0 <= self.overlap < self.patch_w:
            raise ValueError(f"overlap must satisfy 0 <= overlap < patch_w, got {self.overlap}")
        if not self.upscale >= 1:
            raise ValueError("upscale must be >= 1")
        if not (self.lambda1 > 0 and self.lambda2 > 0):
            raise ValueError("lambda1 and lambda2 must be > 0")
        if self.refinement_mode not in REFINEMENT_MODES:
            raise ValueError(f"refinement_mode must be one of {REFINEMENT_MODES}")
        if self.weighting_mode not in WEIGHTING_MODES:
            raise ValueError(f"weighting_mode must be one of {WEIGHTING_MODES}")
        if self.solver_method not in METHODS:
            raise ValueError(f"solver_method must be one of {METHODS}")
        if self.hr_alignment not in ALIGNMENTS:
            raise ValueError(f"hr_alignment must be one of {ALIGNMENTS}")
        if self.residual_mode not in RESIDUAL_MODES:
            raise ValueError(f"residual_mode must be one of {RESIDUAL_MODES}")
        if self.epsilon_weight < 0:
            raise ValueError("epsilon_weight must be >= 0")
        if self.refinement_mode == "multi_scale":
            if not sched:
                raise ValueError("scale_schedule must not be empty")
            for s, n in sched:
                if not 1 < s <= self.upscale + 1e-12 or n < 0:
                    raise ValueError(f"schedule entry ({s}, {n}) outside (1, upscale] or negative")
            if abs(sched[-1][0] - self.upscale) > 1e-9:
                raise ValueError("the last schedule scale must equal upscale")

    def schedule(self) -> tuple:
        """Refinement steps actually run for the configured mode."""
        if self.refinement_mode == "none":
            return ()
        if self.refinement_mode == "conventional":
            return ((self.upscale, CONVENTIONAL_ITERS),)
        return self.scale_schedule

    @property
    def hr_patch_w(self) -> int:
        return int(round(self.patch_w * self.upscale))

    def with_upscale(self, upscale: float) -> "SRConfig":
        """Copy for another factor, regenerating the default-style schedule."""
        return replace(self, upscale=upscale, scale_schedule=default_schedule(self.patch_w, upscale))

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def default_schedule(patch_w: int, upscale: float) -> tuple:
    """One pixel of HR patch growth per step, two iterations at the target scale.

    For ``patch_w=6, upscale=2`` this is ``7/6 .. 12/6`` with iterations
    ``[1, 1, 1, 1, 1, 2]``; the shipped default zeroes the ``11/6`` step.
    """
    if patch_w == 6 and abs(upscale - 2.0) < 1e-12:
        return DEFAULT_SCHEDULE
    target = patch_w * upscale
    sizes = list(range(patch_w + 1, int(np.ceil(target - 1e-9))))
    steps = [(n / patch_w, 1) for n in sizes if n / patch_w < upscale]
    return tuple(steps) + ((float(upscale), 2),)


@dataclass(frozen=True, eq=False)
class PatchResult:
    """One coded patch: ``hr_pixels = Phi_upscale @ alpha_fine + offset``.

    ``offset`` is the LR patch mean removed before coding (0 when
    ``subtract_mean`` is off); ``loss`` is the objective of ``alpha_fine`` on
    the (centred) LR patch with ``lambda1``.
    """

    origin: tuple[int, int]
    alpha_fine: SparseCode
    hr_pixels: np.ndarray
    loss: float
    offset: float = 0.0


# ---------------------------------------------------------------------------
# operators derived from a dictionary
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Operators:
    """Matrices a pipeline run needs: LR atoms, Gram, D*Phi_s per step, HR atoms."""

    phi1: np.ndarray
    gram: np.ndarray
    step_ops: np.ndarray
    step_iters: np.ndarray
    phi_up: np.ndarray


@functools.lru_cache(maxsize=64)
def _rendered(dictionary: Dictionary, scale: float, alignment: str) -> np.ndarray:
    m = render_dictionary_matrix(dictionary, scale, alignment)
    m.setflags(write=False)
    return m


@functools.lru_cache(maxsize=64)
def downsampled_dictionary(dictionary: Dictionary, scale: float, alignment: str) -> np.ndarray:
    """``D @ Phi_s``: HR renders at ``scale`` area-averaged back to the LR patch grid."""
    w, h = dictionary.patch_w, dictionary.patch_h
    hs, ws = int(round(h * scale)), int(round(w * scale))
    D = image.downsample_matrix(hs, ws, h, w)
    out = np.ascontiguousarray(D @ _rendered(dictionary, scale, alignment))
    out.setflags(write=False)
    return out


def operators(dictionary: Dictionary, config: SRConfig) -> Operators:
    if dictionary.patch_w != config.patch_w or dictionary.patch_h != config.patch_w:
        raise ValueError(f"dictionary patch {dictionary.patch_w}x{dictionary.patch_h} does not "
                         f"match config patch_w={config.patch_w}")
    phi1 = np.ascontiguousarray(_rendered(dictionary, 1.0, "corner"))
    sched = config.schedule()
    m, n = phi1.shape
    if sched:
        step_ops = np.stack([downsampled_dictionary(dictionary, s, config.hr_alignment)
                             for s, _ in sched])
        step_iters = np.array([it for _, it in sched], dtype=np.int64)
    else:
        step_ops = np.zeros((0, m, n))
        step_iters = np.zeros(0, dtype=np.int64)
    phi_up = np.ascontiguousarray(_rendered(dictionary, float(config.upscale), config.hr_alignment))
    return Operators(phi1, gram(phi1), np.ascontiguousarray(step_ops), step_iters, phi_up)


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _refine_one(y, x0, phi1, G, step_ops, step_iters, lam2, tol, max_iters, use_h, cumulative,
                afine):
    # telescoped: residual_k = residual_{k-1} - D Phi_s alpha_{k-1}
    # cumulative: residual_k = y - D Phi_s (alpha_coarse + alpha_1 + ... + alpha_{k-1})
    m, n = phi1.shape
    resid = y.copy()
    prev = x0.copy()
    cur = np.zeros(n)
    for k in range(n):
        afine[k] = x0[k]
    for s in range(step_ops.shape[0]):
        M = step_ops[s]
        for _ in range(step_iters[s]):
            src = afine if cumulative else prev
            for i in range(m):
                acc = 0.0
                for k in range(n):
                    if src[k] != 0.0:
                        acc += M[i, k] * src[k]
                if cumulative:
                    resid[i] = y[i] - acc
                else:
                    resid[i] -= acc
            _solve_one(phi1, G, resid, lam2, tol, max_iters, use_h, cur)
            for k in range(n):
                afine[k] += cur[k]
                prev[k] = cur[k]


@numba.njit(cache=True)
def _patch_loss(y, x, phi1, lam):
    m, n = phi1.shape
    res = 0.0
    for i in range(m):
        s = y[i]
        for k in range(n):
            if x[k] != 0.0:
                s -= phi1[i, k] * x[k]
        res += s * s
    l1 = 0.0
    for k in range(n):
        l1 += abs(x[k])
    return res, res + lam * l1


@numba.njit(cache=True)
def _synthesize(x, phi_up, out):
    for i in range(phi_up.shape[0]):
        acc = 0.0
        for k in range(phi_up.shape[1]):
            if x[k] != 0.0:
                acc += phi_up[i, k] * x[k]
        out[i] = acc


@numba.njit(cache=True, parallel=True)
def _run_patches(Y, phi1, G, step_ops, step_iters, phi_up, lam1, lam2, tol, max_iters, use_h,
                 cumulative, center, A, H, loss, res, offsets):
    for p in numba.prange(Y.shape[0]):
        y = Y[p].copy()
        mean = 0.0
        if center:
            mean = y.mean()
            y -= mean
        x0 = np.zeros(phi1.shape[1])
        _solve_one(phi1, G, y, lam1, tol, max_iters, use_h, x0)
        _refine_one(y, x0, phi1, G, step_ops, step_iters, lam2, tol, max_iters, use_h,
                    cumulative, A[p])
        r, l = _patch_loss(y, A[p], phi1, lam1)
        res[p] = r
        loss[p] = l
        _synthesize(A[p], phi_up, H[p])
        H[p] += mean
        offsets[p] = mean


# ---------------------------------------------------------------------------
# per-patch API
# ---------------------------------------------------------------------------

def _pixels(p) -> np.ndarray:
    arr = p.pixels if isinstance(p, image.PatchView) else p
    return np.ascontiguousarray(arr, dtype=np.float64).ravel()


def _code(y, lam, ops: Operators, config: SRConfig) -> SparseCode:
    x = np.zeros(ops.phi1.shape[1])
    res, sweeps = _solve_one(ops.phi1, ops.gram, y, lam, config.tolerance, config.max_iters,
                             config.solver_method == "homotopy", x)
    return SparseCode.from_dense(x, res + lam * np.abs(x).sum(), res, sweeps)


def code_patch_coarse(p, dictionary: Dictionary, lambda1: float = 1e-4,
                      config: SRConfig | None = None) -> SparseCode:
    """Coarse code of one LR patch against the scale-1 dictionary."""
    config = SRConfig(lambda1=lambda1, patch_w=dictionary.patch_w) if config is None else config
    ops = operators(dictionary, replace(config, refinement_mode="none"))
    y = _pixels(p)
    if y.size != ops.phi1.shape[0]:
        raise ValueError(f"patch has {y.size} pixels, dictionary expects {ops.phi1.shape[0]}")
    return _code(y, lambda1, ops, config)


def refine_patch(p, alpha0: SparseCode, dictionary: Dictionary, config: SRConfig) -> SparseCode:
    """Residual refinement over the configured scale schedule.

    The returned code's objective is evaluated on the original patch with
    ``lambda1``.
    """
    ops = operators(dictionary, config)
    y = _pixels(p)
    x0 = alpha0.dense()
    afine = np.zeros_like(x0)
    _refine_one(y, x0, ops.phi1, ops.gram, ops.step_ops, ops.step_iters, config.lambda2,
                config.tolerance, config.max_iters, config.solver_method == "homotopy",
                config.residual_mode == "cumulative", afine)
    res, loss = _patch_loss(y, afine, ops.phi1, config.lambda1)
    return SparseCode.from_dense(afine, loss, res)


def synthesize_hr_patch(alpha: SparseCode, dictionary: Dictionary, upscale: float = 2.0,
                        alignment: str = "center") -> np.ndarray:
    """``Phi_upscale @ alpha``, accumulated over the nonzero coefficients only."""
    phi_up = np.ascontiguousarray(_rendered(dictionary, float(upscale), alignment))
    out = np.zeros(phi_up.shape[0])
    _synthesize(alpha.dense(), phi_up, out)
    return out


# ---------------------------------------------------------------------------
# whole planes
# ---------------------------------------------------------------------------

def hfsr_patches(lr, dictionary: Dictionary, config: SRConfig | None = None) -> list[PatchResult]:
    """Code, refine and synthesise every LR patch (raster-scan order)."""
    config = SRConfig() if config is None else config
    Y, origins = image.patch_matrix(lr, config.patch_w, config.overlap)
    ops = operators(dictionary, config)
    P, n = Y.shape[0], ops.phi1.shape[1]
    A = np.zeros((P, n))
    H = np.zeros((P, ops.phi_up.shape[0]))
    loss = np.zeros(P)
    res = np.zeros(P)
    offsets = np.zeros(P)
    _run_patches(np.ascontiguousarray(Y), ops.phi1, ops.gram, ops.step_ops, ops.step_iters,
                 ops.phi_up, config.lambda1, config.lambda2, config.tolerance, config.max_iters,
                 config.solver_method == "homotopy", config.residual_mode == "cumulative",
                 config.subtract_mean, A, H, loss, res, offsets)
    return [
        PatchResult(origin, SparseCode.from_dense(A[p], loss[p], res[p]), H[p], float(loss[p]),
                    float(offsets[p]))
        for p, origin in enumerate(origins)
    ]


def patch_weights(losses, mode: str = "inverse_loss", epsilon: float = 1e-8) -> np.ndarray:
    losses = np.asarray(losses, dtype=np.float64)
    if mode == "inverse_loss":
        return 1.0 / (losses + epsilon)
    if mode == "literal_loss":
        return losses.copy()
    if mode == "uniform":
        return np.ones_like(losses)
    raise ValueError(f"weighting mode must be one of {WEIGHTING_MODES}")


def reconstruct_image(results, out_w: int, out_h: int, config: SRConfig | None = None) -> np.ndarray:
    """Per-pixel weighted mean of the overlapping HR patches, clamped to [0, 1].

    Patches are accumulated in raster order of their LR origins whatever order
    ``results`` comes in.  Pixels whose weights sum to zero (possible with
    ``literal_loss``) fall back to the plain mean.
    """
    config = SRConfig() if config is None else config
    results = sorted(results, key=lambda r: r.origin)
    if not results:
        raise ValueError("no patch results to reconstruct from")
    hp = int(round(np.sqrt(results[0].hr_pixels.size)))
    weights = patch_weights([r.loss for r in results], config.weighting_mode, config.epsilon_weight)
    acc = np.zeros((out_h, out_w))
    wsum = np.zeros((out_h, out_w))
    plain = np.zeros((out_h, out_w))
    count = np.zeros((out_h, out_w))
    for r, wgt in zip(results, weights):
        top, left = hr_origin(r.origin, config.upscale, hp, out_h, out_w)
        block = r.hr_pixels.reshape(hp, hp)
        acc[top:top + hp, left:left + hp] += wgt * block
        wsum[top:top + hp, left:left + hp] += wgt
        plain[top:top + hp, left:left + hp] += block
        count[top:top + hp, left:left + hp] += 1.0
    if np.any(count == 0):
        raise ValueError("some output pixels are not covered by any patch")
    zero = wsum == 0
    out = np.where(zero, plain / count, acc / np.where(zero, 1.0, wsum))
    return np.clip(out, 0.0, 1.0)


def hr_origin(origin, upscale: float, hp: int, out_h: int, out_w: int) -> tuple[int, int]:
    r, c = origin
    top = int(round(r * upscale))
    left = int(round(c * upscale))
    if top < 0 or left < 0 or top + hp > out_h or left + hp > out_w:
        top = min(max(top, 0), out_h - hp)
        left = min(max(left, 0), out_w - hp)
    return top, left


def super_resolve_plane(lr, dictionary: Dictionary, config: SRConfig | None = None,
                        return_patches: bool = False):
    """Upscale a ``[0, 1]`` luminance plane by ``config.upscale``."""
    config = SRConfig() if config is None else config
    lr = image.as_plane(lr)
    h, w = lr.shape
    results = hfsr_patches(lr, dictionary, config)
    out_h, out_w = int(round(h * config.upscale)), int(round(w * config.upscale))
    hr = reconstruct_image(results, out_w, out_h, config)
    return (hr, results) if return_patches else hr


def super_resolve_rgb(img, dictionary: Dictionary, config: SRConfig | None = None) -> np.ndarray:
    """Y through the sparse-coding path, Cb/Cr through bicubic interpolation."""
    config = SRConfig() if config is None else config
    y, cb, cr = image.rgb_to_ycbcr(img)
    y_hr = super_resolve_plane(y / 255.0, dictionary, config) * 255.0
    cb_hr = image.upsample_bicubic(cb, config.upscale)
    cr_hr = image.upsample_bicubic(cr, config.upscale)
    return image.ycbcr_to_rgb(y_hr, cb_hr, cr_hr)
