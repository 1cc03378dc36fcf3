"""Euclidean projection onto ``{w : A w = c, lo <= w <= hi}``.

Solved in the dual with a semismooth Newton iteration: for multipliers
``lam`` the primal minimizer is ``clip(y + A^T lam, lo, hi)`` and the dual
gradient is the constraint residual. The dual has only ``A.shape[0]``
unknowns (four, for everything in this package), so each step is a tiny
dense solve regardless of the number of atoms.
"""

import numpy as np
from scipy.optimize import lsq_linear


def _dual_value(lam, y, A, c, lo, hi):
    w = np.clip(y + A.T @ lam, lo, hi)
    return 0.5 * np.dot(w - y, w - y) - lam @ (A @ w - c), w


def project_affine_box(y, A, c, lo=0.0, hi=np.inf, tol=1e-12, max_iter=200):
    """Return ``(w, residual)`` where ``w`` is the projection of ``y``.

    ``residual`` is ``max |A w - c|``. When the feasible set is empty the
    iteration diverges; the routine then returns the bounded least-squares
    point (smallest achievable residual) instead, so ``residual > tol`` is the
    infeasibility signal.
    """
    y = np.asarray(y, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    c = np.atleast_1d(np.asarray(c, dtype=float))
    lo_arr = np.broadcast_to(lo, y.shape)
    hi_arr = np.broadcast_to(hi, y.shape)
    scale = max(1.0, np.abs(c).max())
    lam = np.zeros(A.shape[0])
    g, w = _dual_value(lam, y, A, c, lo_arr, hi_arr)
    for _ in range(max_iter):
        res = A @ w - c
        if np.abs(res).max() <= tol * scale:
            return w, float(np.abs(res).max())
        z = y + A.T @ lam
        free = (z > lo_arr) & (z < hi_arr)
        As = A[:, free]
        H = As @ As.T + 1e-13 * np.eye(A.shape[0])
        try:
            step = -np.linalg.solve(H, res)
        except np.linalg.LinAlgError:
            step = -res
        slope = -res @ step
        if slope <= 0:
            step, slope = -res, res @ res
        alpha = 1.0
        while alpha > 1e-12:
            g_new, w_new = _dual_value(lam + alpha * step, y, A, c, lo_arr, hi_arr)
            if g_new >= g + 1e-4 * alpha * slope or g_new > g:
                break
            alpha *= 0.5
        else:
            break
        lam = lam + alpha * step
        g, w = g_new, w_new
        if np.abs(lam).max() > 1e12:
            break
    res = A @ w - c
    if np.abs(res).max() <= tol * scale:
        return w, float(np.abs(res).max())
    bounds = (np.where(np.isfinite(lo_arr), lo_arr, -np.inf), np.where(np.isfinite(hi_arr), hi_arr, np.inf))
    sol = lsq_linear(A, c, bounds=bounds, method="bvls", tol=1e-14)
    return sol.x, float(np.abs(A @ sol.x - c).max())
