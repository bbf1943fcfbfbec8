"""Reference LASSO solution through a generic conic solver."""
import cvxpy as cp
import numpy as np


def reference_lasso(y, Phi, lam):
    a = cp.Variable(Phi.shape[1])
    prob = cp.Problem(cp.Minimize(cp.sum_squares(y - Phi @ a) + lam * cp.norm1(a)))
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12)
    return np.asarray(a.value), float(prob.value)
