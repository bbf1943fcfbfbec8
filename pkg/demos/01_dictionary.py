"""
The function dictionary
=======================

Every atom is a closed-form function of pixel position, so the same atom can
be sampled on a 6x6 grid or on any finer grid.  This walk-through builds the
default dictionary, looks at its make-up and shows one atom at three scales.
"""
from pathlib import Path

import numpy as np

from hfsr import build_dictionary, save_dictionary
from hfsr.image import plane_to_rgb, write_rgb

OUT = Path(__file__).parent / "out"
OUT.mkdir(exist_ok=True)

d = build_dictionary()
print("atoms:", len(d), d.family_counts())

# normalisation happens on the 6x6 render; larger renders reuse the divisor
print("LR norm range: %.3f .. %.3f" % (d.norm_factors.min(), d.norm_factors.max()))

# arctan edge atoms come in sign-flipped pairs, which makes the dictionary very coherent
Phi = d.matrix(1.0)
G = np.abs(Phi.T @ Phi)
np.fill_diagonal(G, 0)
print("mutual coherence: %.4f" % G.max())
print("atoms with a near-duplicate (|<a,b>| > 0.99):", int((G.max(axis=0) > 0.99).sum()))

# --- one atom, three grids --------------------------------------------------
k = 40
print("atom", k, d.atoms[k])
for s in (1, 2, 3):
    img = d.render_atom(k, s).reshape(6 * s, 6 * s)
    # rescale to [0, 1] for viewing, then blow up so each pixel is visible
    view = (img - img.min()) / (np.ptp(img) + 1e-12)
    view = np.kron(view, np.ones((48 // s, 48 // s)))
    write_rgb(OUT / f"atom{k}_x{s}.png", plane_to_rgb(view))
    # the corner-aligned grid at scale s contains the scale-1 grid exactly
    if s > 1:
        print(f"  x{s} render sampled every {s} px == x1 render:",
              np.array_equal(img[::s, ::s], d.render_atom(k, 1).reshape(6, 6)))

# the whole parameter table is plain text and round-trips through load_dictionary
save_dictionary(d, OUT / "dictionary.tsv")
print("wrote", OUT / "dictionary.tsv")
