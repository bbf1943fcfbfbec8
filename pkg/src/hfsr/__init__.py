"""Hybrid-function sparse representation for single-image super-resolution.

A training-free dictionary of closed-form atoms (arctan edges, oriented sines,
DCT products) codes each low-resolution patch by LASSO; because atoms are
functions, the same code renders directly on a finer grid.
"""
from .dictionary import (AtomParams, Dictionary, EmptyDictionaryError, GridSpec, build_dictionary,
                         load_dictionary, render_atom, save_dictionary)
from .metrics import EvalReport, psnr
from .pipeline import (PatchResult, SRConfig, code_patch_coarse, reconstruct_image, refine_patch,
                       super_resolve_plane, super_resolve_rgb)
from .solver import SolverSettings, SparseCode, solve_lasso

__all__ = [
    "AtomParams", "Dictionary", "EmptyDictionaryError", "GridSpec", "build_dictionary",
    "load_dictionary", "render_atom", "save_dictionary", "EvalReport", "psnr", "PatchResult",
    "SRConfig", "code_patch_coarse", "reconstruct_image", "refine_patch", "super_resolve_plane",
    "super_resolve_rgb", "SolverSettings", "SparseCode", "solve_lasso",
]
__version__ = "0.1.0"
