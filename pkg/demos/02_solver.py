"""
LASSO coding of one patch
=========================

Each 6x6 patch is coded by  min ||y - Phi a||^2 + lam ||a||_1.  The solver
follows the regularisation path (homotopy) and then polishes with coordinate
descent, so the result satisfies the optimality conditions to ~1e-10.
"""
import time

import numpy as np

from hfsr import SolverSettings, build_dictionary, solve_lasso
from hfsr.solver import kkt_violation, lasso_objective

rng = np.random.default_rng(0)
d = build_dictionary()
Phi = d.matrix(1.0)

# a patch made of three atoms plus a little noise
truth = np.zeros(len(d))
truth[rng.choice(len(d), 3, replace=False)] = rng.uniform(0.2, 1.0, 3)
y = Phi @ truth + 0.01 * rng.standard_normal(36)

for lam in (1e-1, 1e-2, 1e-3, 1e-4):
    t0 = time.perf_counter()
    code = solve_lasso(y, Phi, SolverSettings(lam))
    dt = time.perf_counter() - t0
    a = code.dense()
    print(f"lam={lam:g}: {len(code):3d} nonzeros  objective {code.objective:.6f}"
          f"  KKT {kkt_violation(a, y, Phi, lam):.1e}  ({dt * 1e3:.2f} ms)")

# the first call includes numba compilation.  Smaller lam buys a smaller residual
# with more atoms; the +/- atom pairs make the support non-unique, the objective is not.
a = solve_lasso(y, Phi, SolverSettings(1e-4)).dense()
print("objective recomputed:", lasso_objective(a, y, Phi, 1e-4))
print("residual norm:", np.linalg.norm(y - Phi @ a))
