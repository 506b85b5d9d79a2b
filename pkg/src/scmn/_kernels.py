"""Compiled inner loops for protograph and coupled-chain density evolution.

Status codes returned by the ``*_run`` kernels::

    CONVERGED  messages fell below the target tolerance
    STALLED    per-sweep change fell below the stall tolerance first
    MAX_ITERS  iteration budget exhausted
    INFEASIBLE anchored iteration hit a zero parity mean
"""

import numba
import numpy as np

CONVERGED = 1
STALLED = 0
MAX_ITERS = -1
INFEASIBLE = -2


@numba.njit(cache=True)
def _leave_one_out(vals, n, out):
    # out[s] = prod(vals[:n]) / vals[s] without dividing
    acc = 1.0
    for s in range(n):
        out[s] = acc
        acc *= vals[s]
    acc = 1.0
    for s in range(n - 1, -1, -1):
        out[s] *= acc
        acc *= vals[s]


@numba.njit(cache=True)
def proto_sweep(c2v, eps_col, var_ptr, var_slots, chk_ptr, chk_slots, out_v2c, out_c2v, buf_a, buf_b):
    """One flooding sweep: variable side from ``c2v``, then check side from the new ``v2c``."""
    n_var = var_ptr.size - 1
    for v in range(n_var):
        start = var_ptr[v]
        d = var_ptr[v + 1] - start
        for s in range(d):
            buf_a[s] = c2v[var_slots[start + s]]
        _leave_one_out(buf_a, d, buf_b)
        for s in range(d):
            out_v2c[var_slots[start + s]] = eps_col[v] * buf_b[s]
    n_chk = chk_ptr.size - 1
    for c in range(n_chk):
        start = chk_ptr[c]
        d = chk_ptr[c + 1] - start
        for s in range(d):
            buf_a[s] = 1.0 - out_v2c[chk_slots[start + s]]
        _leave_one_out(buf_a, d, buf_b)
        for s in range(d):
            out_c2v[chk_slots[start + s]] = 1.0 - buf_b[s]


@numba.njit(cache=True)
def proto_app(c2v, eps_col, var_ptr, var_slots, out):
    n_var = var_ptr.size - 1
    for v in range(n_var):
        p = eps_col[v]
        for s in range(var_ptr[v], var_ptr[v + 1]):
            p *= c2v[var_slots[s]]
        out[v] = p


@numba.njit(cache=True)
def proto_run(v2c, c2v, eps_col, var_ptr, var_slots, chk_ptr, chk_slots, max_iters, tol, stall_tol, trace):
    """Iterate sweeps in place until the largest a-posteriori erasure is below ``tol``.

    ``trace`` (length ``max_iters`` or 0) receives the per-sweep maximum
    a-posteriori erasure probability.
    """
    n_edges = v2c.size
    width = max(np.max(np.diff(var_ptr)), np.max(np.diff(chk_ptr)))
    buf_a = np.empty(width)
    buf_b = np.empty(width)
    new_v2c = np.empty(n_edges)
    new_c2v = np.empty(n_edges)
    app = np.empty(var_ptr.size - 1)
    for it in range(1, max_iters + 1):
        proto_sweep(c2v, eps_col, var_ptr, var_slots, chk_ptr, chk_slots, new_v2c, new_c2v, buf_a, buf_b)
        proto_app(new_c2v, eps_col, var_ptr, var_slots, app)
        worst = app.max()
        if trace.size:
            trace[it - 1] = worst
        change = 0.0
        for e in range(n_edges):
            dv = abs(new_v2c[e] - v2c[e])
            dc = abs(new_c2v[e] - c2v[e])
            if dv > change:
                change = dv
            if dc > change:
                change = dc
            v2c[e] = new_v2c[e]
            c2v[e] = new_c2v[e]
        if worst < tol:
            return CONVERGED, it
        if change < stall_tol:
            return STALLED, it
    return MAX_ITERS, max_iters


@numba.njit(cache=True)
def chain_brackets(x, y, r, g, w, bx, by):
    """Window-averaged check brackets for every section.

    ``bx[i] = (1/w) sum_j [1 - (1 - X_{i+j})^(r-1) (1 - Y_{i+j})^g]`` and
    ``by[i]`` likewise with exponents ``r`` and ``g-1``, where
    ``X_m = (1/w) sum_k x_{m-k}`` and sections outside the chain read 0.
    """
    n = x.size
    n_chk = n + w - 1
    cx = np.empty(n_chk)
    cy = np.empty(n_chk)
    for m in range(n_chk):
        sx = 0.0
        sy = 0.0
        for k in range(w):
            idx = m - k
            if 0 <= idx < n:
                sx += x[idx]
                sy += y[idx]
        qx = 1.0 - sx / w
        qy = 1.0 - sy / w
        cx[m] = 1.0 - qx ** (r - 1) * qy**g
        cy[m] = 1.0 - qx**r * qy ** (g - 1)
    for i in range(n):
        sx = 0.0
        sy = 0.0
        for j in range(w):
            sx += cx[i + j]
            sy += cy[i + j]
        bx[i] = sx / w
        by[i] = sy / w


@numba.njit(cache=True)
def chain_sweep(x, y, eps, l, r, g, w, out_x, out_y):
    n = x.size
    bx = np.empty(n)
    by = np.empty(n)
    chain_brackets(x, y, r, g, w, bx, by)
    for i in range(n):
        out_x[i] = bx[i] ** (l - 1)
        out_y[i] = eps * by[i] ** (g - 1)


@numba.njit(cache=True)
def chain_run(x, y, eps, l, r, g, w, max_iters, tol, stall_tol):
    n = x.size
    nx = np.empty(n)
    ny = np.empty(n)
    for it in range(1, max_iters + 1):
        chain_sweep(x, y, eps, l, r, g, w, nx, ny)
        worst = 0.0
        change = 0.0
        for i in range(n):
            worst = max(worst, nx[i], ny[i])
            change = max(change, abs(nx[i] - x[i]), abs(ny[i] - y[i]))
            x[i] = nx[i]
            y[i] = ny[i]
        if worst < tol:
            return CONVERGED, it
        if change < stall_tol:
            return STALLED, it
    return MAX_ITERS, max_iters


@numba.njit(cache=True)
def anchored_run(x, y, anchor, l, r, g, w, max_iters, tol):
    """Fixed-point iteration with ``eps`` rescaled each sweep so that ``mean(y) = anchor``.

    Returns ``(status, iterations, eps, raw_eps)``; ``raw_eps`` is the
    unclamped rescaling factor of the last sweep.
    """
    n = x.size
    bx = np.empty(n)
    by = np.empty(n)
    eps = 0.0
    raw = 0.0
    for it in range(1, max_iters + 1):
        chain_brackets(x, y, r, g, w, bx, by)
        mean_hat = 0.0
        for i in range(n):
            by[i] = by[i] ** (g - 1)
            mean_hat += by[i]
        mean_hat /= n
        if mean_hat <= 0.0:
            return INFEASIBLE, it, eps, raw
        raw = anchor / mean_hat
        eps = min(max(raw, 0.0), 1.0)
        change = 0.0
        for i in range(n):
            nx = bx[i] ** (l - 1)
            ny = eps * by[i]
            change = max(change, abs(nx - x[i]), abs(ny - y[i]))
            x[i] = nx
            y[i] = ny
        if change < tol:
            return CONVERGED, it, eps, raw
    return MAX_ITERS, max_iters, eps, raw
