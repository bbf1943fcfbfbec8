"""l1-regularised least squares for single patches.

Solves ``min_a ||y - Phi a||^2 + lam * ||a||_1`` (quadratic term not halved)
for a dictionary ``Phi`` with unit-norm columns.

The default ``"homotopy"`` method follows the LASSO regularisation path from
``lam_max = 2 max|Phi^T y|`` down to ``lam``, repairs any remaining KKT
violation with sign-fixed Newton steps and an exact line search, then runs
cyclic soft-threshold coordinate sweeps until the largest coefficient update
drops below ``tolerance``.  ``"cd"`` runs the coordinate sweeps alone from
zero; it is exact in the limit but crawls on coherent dictionaries.
"""
from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

METHODS = ("homotopy", "cd")


@dataclass(frozen=True)
class SolverSettings:
    lam: float
    max_iters: int = 1000
    tolerance: float = 1e-7
    method: str = "homotopy"

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be > 0")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")


@dataclass(frozen=True, eq=False)
class SparseCode:
    """Sparse coefficients (nonzero entries only) and the final objective."""

    indices: np.ndarray
    values: np.ndarray
    n_atoms: int
    objective: float
    residual_norm_sq: float
    sweeps: int = 0

    @classmethod
    def from_dense(cls, alpha, objective: float, residual_norm_sq: float, sweeps: int = 0):
        alpha = np.asarray(alpha, dtype=np.float64)
        idx = np.flatnonzero(alpha)
        return cls(idx, alpha[idx].copy(), alpha.size, float(objective),
                   float(residual_norm_sq), sweeps)

    @classmethod
    def zeros(cls, n_atoms: int, objective: float = 0.0):
        return cls(np.empty(0, np.int64), np.empty(0), n_atoms, objective, objective)

    def dense(self) -> np.ndarray:
        out = np.zeros(self.n_atoms)
        out[self.indices] = self.values
        return out

    @property
    def l1(self) -> float:
        return float(np.abs(self.values).sum())

    def __len__(self) -> int:
        return self.indices.size


def lasso_objective(alpha, target, matrix, lam: float) -> float:
    r = np.asarray(target) - np.asarray(matrix) @ np.asarray(alpha)
    return float(r @ r + lam * np.abs(alpha).sum())


def kkt_violation(alpha, target, matrix, lam: float) -> float:
    """Largest violation of the optimality conditions of the un-halved objective.

    Active atoms need ``2 phi_k^T (Phi a - y) + lam sign(a_k) = 0``; inactive
    ones need ``|2 phi_k^T (Phi a - y)| <= lam``.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    matrix = np.asarray(matrix, dtype=np.float64)
    g = 2.0 * matrix.T @ (matrix @ alpha - np.asarray(target, dtype=np.float64))
    on = alpha != 0
    v_on = np.abs(g[on] + lam * np.sign(alpha[on]))
    v_off = np.abs(g[~on]) - lam
    return float(max(v_on.max(initial=0.0), v_off.max(initial=0.0), 0.0))


# ---------------------------------------------------------------------------
# numba kernels; all work on the Gram matrix G = Phi^T Phi and c = Phi^T y
# ---------------------------------------------------------------------------

@numba.njit(cache=True)
def _chol_factor(G, idx, k, L):
    # L <- cholesky(G[idx[:k], idx[:k]]); returns False on a non-positive pivot
    for a in range(k):
        for b in range(a + 1):
            s = G[idx[a], idx[b]]
            for t in range(b):
                s -= L[a, t] * L[b, t]
            if a == b:
                if not s > 0.0:
                    return False
                L[a, a] = np.sqrt(s)
            else:
                L[a, b] = s / L[b, b]
    return True


@numba.njit(cache=True)
def _chol_solve(L, k, rhs, out):
    for a in range(k):
        s = rhs[a]
        for t in range(a):
            s -= L[a, t] * out[t]
        out[a] = s / L[a, a]
    for a in range(k - 1, -1, -1):
        s = out[a]
        for t in range(a + 1, k):
            s -= L[t, a] * out[t]
        out[a] = s / L[a, a]


@numba.njit(cache=True)
def _objective(G, c, yy, x, lam):
    n = x.size
    quad = 0.0
    lin = 0.0
    l1 = 0.0
    for a in range(n):
        xa = x[a]
        if xa == 0.0:
            continue
        lin += c[a] * xa
        l1 += abs(xa)
        s = 0.0
        for b in range(n):
            if x[b] != 0.0:
                s += G[a, b] * x[b]
        quad += xa * s
    return yy - 2.0 * lin + quad + lam * l1


@numba.njit(cache=True)
def _homotopy(G, c, mu_target, max_steps, dep_tol, alpha):
    # Path of the LASSO solution for mu = lam/2 going down from max|c|.
    # Columns numerically dependent on the active set are skipped until the
    # next drop (exact +-duplicates occur in the default dictionary).
    n = G.shape[0]
    r = c.copy()
    act = np.empty(n, np.int64)
    sgn = np.empty(n)
    isact = np.zeros(n, np.bool_)
    banned = np.zeros(n, np.bool_)
    L = np.zeros((n, n))
    w = np.empty(n)
    a = np.empty(n)
    lrow = np.empty(n)
    mu = 0.0
    j = -1
    for i in range(n):
        if abs(c[i]) > mu:
            mu = abs(c[i])
            j = i
    if mu <= mu_target:
        return 0
    act[0] = j
    sgn[0] = 1.0 if c[j] > 0 else -1.0
    isact[j] = True
    k = 1
    L[0, 0] = np.sqrt(G[j, j])
    steps = 0
    last_drop = -1
    while steps < max_steps:
        steps += 1
        _chol_solve(L, k, sgn, w)
        for i in range(n):
            s = 0.0
            for t in range(k):
                s += G[i, act[t]] * w[t]
            a[i] = s
        d = mu - mu_target
        kind = 0
        who = -1
        for i in range(n):
            if isact[i] or banned[i] or i == last_drop:
                continue
            den = 1.0 - a[i]
            if den > 1e-12:
                t = (mu - r[i]) / den
                if 0.0 <= t < d:
                    d = t
                    kind = 1
                    who = i
            den = 1.0 + a[i]
            if den > 1e-12:
                t = (mu + r[i]) / den
                if 0.0 <= t < d:
                    d = t
                    kind = 1
                    who = i
        for t in range(k):
            if alpha[act[t]] * w[t] < 0.0:
                tt = -alpha[act[t]] / w[t]
                if 0.0 <= tt < d:
                    d = tt
                    kind = 2
                    who = t
        for t in range(k):
            alpha[act[t]] += d * w[t]
        for i in range(n):
            r[i] -= d * a[i]
        mu -= d
        last_drop = -1
        if kind == 0:
            break
        if kind == 2:
            i = act[who]
            alpha[i] = 0.0
            isact[i] = False
            for t in range(who, k - 1):
                act[t] = act[t + 1]
                sgn[t] = sgn[t + 1]
            k -= 1
            last_drop = i
            banned[:] = False
            if k == 0:
                best = 0.0
                j = -1
                for q in range(n):
                    if q != i and abs(r[q]) > best:
                        best = abs(r[q])
                        j = q
                if j < 0:
                    break
                act[0] = j
                sgn[0] = 1.0 if r[j] > 0 else -1.0
                isact[j] = True
                k = 1
                L[0, 0] = np.sqrt(G[j, j])
            else:
                _chol_factor(G, act, k, L)
        else:
            i = who
            for q in range(k):
                s = G[act[q], i]
                for t in range(q):
                    s -= L[q, t] * lrow[t]
                lrow[q] = s / L[q, q]
            dd = G[i, i]
            for q in range(k):
                dd -= lrow[q] * lrow[q]
            if dd <= dep_tol * G[i, i]:
                banned[i] = True
                continue
            for q in range(k):
                L[k, q] = lrow[q]
            L[k, k] = np.sqrt(dd)
            act[k] = i
            sgn[k] = 1.0 if r[i] > 0 else -1.0
            isact[i] = True
            k += 1
    return steps


@numba.njit(cache=True)
def _line_search(G, c, x, d, lam):
    # exact minimiser over t in [0, 1] of the convex piecewise quadratic f(x + t d)
    n = x.size
    Gd = G @ d
    A = d @ Gd
    B = 2.0 * (x @ Gd - c @ d)
    bps = np.empty(n + 1)
    m = 0
    for i in range(n):
        if d[i] != 0.0 and x[i] != 0.0:
            t = -x[i] / d[i]
            if 0.0 < t < 1.0:
                bps[m] = t
                m += 1
    bps[m] = 1.0
    m += 1
    bps = np.sort(bps[:m])
    lo = 0.0
    for hi in bps:
        mid = 0.5 * (lo + hi)
        s = 0.0
        for i in range(n):
            if d[i] != 0.0:
                v = x[i] + mid * d[i]
                if v > 0.0:
                    s += d[i]
                elif v < 0.0:
                    s -= d[i]
        slope = B + lam * s
        if A > 0.0:
            t = -slope / (2.0 * A)
            if t <= lo:
                return lo
            if t < hi:
                return t
        elif slope >= 0.0:
            return lo
        lo = hi
    return 1.0


@numba.njit(cache=True)
def _active_set_repair(G, c, x, lam, kkt_tol, max_rounds):
    # Feature-sign style correction: take the worst KKT violator, solve the
    # sign-fixed system on support + violator, exact line search.
    n = x.size
    h = 0.5 * lam
    for rnd in range(max_rounds):
        g = 2.0 * (G @ x - c)
        worst = kkt_tol
        j = -1
        for i in range(n):
            if x[i] != 0.0:
                v = abs(g[i] + lam * np.sign(x[i]))
            else:
                v = abs(g[i]) - lam
            if v > worst:
                worst = v
                j = i
        if j < 0:
            return rnd
        k = 0
        S = np.empty(n, np.int64)
        for i in range(n):
            if x[i] != 0.0 or i == j:
                S[k] = i
                k += 1
        th = np.empty(k)
        rhs = np.empty(k)
        for q in range(k):
            i = S[q]
            th[q] = np.sign(x[i]) if x[i] != 0.0 else -np.sign(g[i])
            rhs[q] = c[i] - h * th[q]
        L = np.zeros((k, k))
        if not _chol_factor(G, S, k, L):
            return -1
        xn = np.empty(k)
        _chol_solve(L, k, rhs, xn)
        d = np.zeros(n)
        for q in range(k):
            d[S[q]] = xn[q] - x[S[q]]
        t = _line_search(G, c, x, d, lam)
        if t <= 0.0:
            return -1
        for q in range(k):
            i = S[q]
            v = x[i] + t * d[i]
            if x[i] != 0.0 and d[i] != 0.0 and abs(t + x[i] / d[i]) <= 1e-14 * t:
                v = 0.0
            x[i] = v
    return max_rounds


@numba.njit(cache=True)
def _cd_sweeps(G, c, x, lam, tol, max_iters):
    # cyclic coordinate descent; returns the number of full sweeps
    n = x.size
    h = 0.5 * lam
    q = G @ x - c
    for it in range(max_iters):
        md = 0.0
        for k in range(n):
            z = x[k] - q[k]
            if z > h:
                nk = z - h
            elif z < -h:
                nk = z + h
            else:
                nk = 0.0
            d = nk - x[k]
            if d != 0.0:
                x[k] = nk
                for l in range(n):
                    q[l] += G[l, k] * d
                if abs(d) > md:
                    md = abs(d)
        if md < tol:
            return it + 1
    return max_iters


@numba.njit(cache=True)
def _solve_one(Phi, G, y, lam, tol, max_iters, use_homotopy, x):
    m, n = Phi.shape
    c = np.zeros(n)
    for k in range(n):
        s = 0.0
        for i in range(m):
            s += Phi[i, k] * y[i]
        c[k] = s
    for k in range(n):
        x[k] = 0.0
    cmax = 0.0
    for k in range(n):
        cmax = max(cmax, abs(c[k]))
    # lam >= 2 max|Phi^T y| means zero is optimal; the slack absorbs rounding in c
    if 2.0 * cmax <= lam * (1.0 + 1e-12):
        res = 0.0
        for i in range(m):
            res += y[i] * y[i]
        return res, 0
    if use_homotopy:
        _homotopy(G, c, 0.5 * lam, 20 * n + 100, 1e-10, x)
        _active_set_repair(G, c, x, lam, tol, 4 * m + 20)
    sweeps = _cd_sweeps(G, c, x, lam, tol, max_iters)
    res = 0.0
    for i in range(m):
        s = y[i]
        for k in range(n):
            if x[k] != 0.0:
                s -= Phi[i, k] * x[k]
        res += s * s
    return res, sweeps


@numba.njit(cache=True)
def _solve_rows(Phi, G, Y, lam, tol, max_iters, use_homotopy, X, res, sweeps):
    for p in range(Y.shape[0]):
        r, s = _solve_one(Phi, G, Y[p], lam, tol, max_iters, use_homotopy, X[p])
        res[p] = r
        sweeps[p] = s


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def _check(target, matrix):
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    target = np.ascontiguousarray(target, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("dictionary matrix must be 2-D")
    if target.shape[-1] != matrix.shape[0]:
        raise ValueError(f"target length {target.shape[-1]} does not match "
                         f"dictionary rows {matrix.shape[0]}")
    if not (np.all(np.isfinite(target)) and np.all(np.isfinite(matrix))):
        raise ValueError("non-finite values in LASSO input")
    return target, matrix


def gram(matrix) -> np.ndarray:
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    return np.ascontiguousarray(matrix.T @ matrix)


def solve_lasso_dense(targets, matrix, settings: SolverSettings, gram_matrix=None):
    """Solve one problem per row of ``targets``.

    Returns ``(coefficients, residual_norm_sq, sweeps)`` with ``coefficients``
    of shape ``(n_targets, n_atoms)``.  Each row is computed independently of
    the others, so results do not depend on batching or order.
    """
    targets, matrix = _check(np.atleast_2d(targets), matrix)
    G = gram(matrix) if gram_matrix is None else np.ascontiguousarray(gram_matrix)
    X = np.zeros((targets.shape[0], matrix.shape[1]))
    res = np.zeros(targets.shape[0])
    sweeps = np.zeros(targets.shape[0], np.int64)
    _solve_rows(matrix, G, targets, settings.lam, settings.tolerance, settings.max_iters,
                settings.method == "homotopy", X, res, sweeps)
    return X, res, sweeps


def solve_lasso(target, matrix, settings: SolverSettings, gram_matrix=None) -> SparseCode:
    """Minimise ``||target - matrix @ a||^2 + lam ||a||_1`` for one target vector."""
    target, matrix = _check(target, matrix)
    if target.ndim != 1:
        raise ValueError("target must be a vector")
    X, res, sweeps = solve_lasso_dense(target[None, :], matrix, settings, gram_matrix)
    alpha = X[0]
    objective = res[0] + settings.lam * np.abs(alpha).sum()
    return SparseCode.from_dense(alpha, objective, res[0], int(sweeps[0]))


def cd_objective_trace(target, matrix, lam: float, n_sweeps: int) -> np.ndarray:
    """Objective after each of ``n_sweeps`` plain coordinate sweeps from zero."""
    target, matrix = _check(target, matrix)
    G = gram(matrix)
    c = matrix.T @ target
    yy = float(target @ target)
    x = np.zeros(matrix.shape[1])
    trace = [yy]
    for _ in range(n_sweeps):
        _cd_sweeps(G, c, x, lam, 0.0, 1)
        trace.append(_objective(G, c, yy, x, lam))
    return np.array(trace)
