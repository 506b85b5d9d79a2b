"""Independent reference implementations used only by the tests.

Everything here is written directly from the defining formulas with plain
Python loops, sharing no code with the package under test.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

DATA = Path(__file__).parent / "data"


def load_grid(name: str) -> np.ndarray:
    lines = (DATA / f"{name}.txt").read_text().split("\n")
    rows, cols = (int(t) for t in lines[0].split())
    grid = np.array([[int(t) for t in ln.split()] for ln in lines[1 : 1 + rows]])
    assert grid.shape == (rows, cols)
    return grid


def scalar_regular_threshold(l: int, r: int) -> float:
    """``min_x x / (1 - (1-x)^(r-1))^(l-1)``: the largest eps without a non-zero fixed point."""

    def f(x):
        return x / (1.0 - (1.0 - x) ** (r - 1)) ** (l - 1)

    xs = np.linspace(1e-4, 1.0, 200_001)
    i = int(np.argmin(f(xs)))
    lo, hi = xs[max(i - 2, 0)], xs[min(i + 2, xs.size - 1)]
    return float(minimize_scalar(f, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14}).fun)


def scalar_regular_step(x: float, eps: float, l: int, r: int) -> float:
    return eps * (1.0 - (1.0 - x) ** (r - 1)) ** (l - 1)


def edge_level_sweep(entries, punctured, c2v_entry, eps):
    """One flooding sweep on the fully expanded graph (every parallel edge separate).

    ``c2v_entry`` gives one incoming value per nonzero entry (row-major);
    returns per-entry ``(v2c, c2v)`` read off the first copy of each entry.
    """
    entries = np.asarray(entries)
    nz = [(c, v) for c in range(entries.shape[0]) for v in range(entries.shape[1]) if entries[c, v]]
    edges = []  # (check, var, entry index)
    for idx, (c, v) in enumerate(nz):
        edges += [(c, v, idx)] * int(entries[c, v])
    c2v = [c2v_entry[e[2]] for e in edges]
    v2c = []
    for a, (c, v, _) in enumerate(edges):
        p = 1.0 if punctured[v] else eps
        for b, (c2, v2, _) in enumerate(edges):
            if b != a and v2 == v:
                p *= c2v[b]
        v2c.append(p)
    new_c2v = []
    for a, (c, v, _) in enumerate(edges):
        q = 1.0
        for b, (c2, v2, _) in enumerate(edges):
            if b != a and c2 == c:
                q *= 1.0 - v2c[b]
        new_c2v.append(1.0 - q)
    out_v2c = np.empty(len(nz))
    out_c2v = np.empty(len(nz))
    seen = set()
    for a, (_, _, idx) in enumerate(edges):
        if idx not in seen:
            seen.add(idx)
            out_v2c[idx] = v2c[a]
            out_c2v[idx] = new_c2v[a]
    return out_v2c, out_c2v


def chain_update(x, y, eps, l, r, g, w, L):
    """The randomized-chain update written with the literal ``i+j-k`` indexing."""

    def X(i):
        return x[i + L] if -L <= i <= L else 0.0

    def Y(i):
        return y[i + L] if -L <= i <= L else 0.0

    nx, ny = [], []
    for i in range(-L, L + 1):
        sx = sy = 0.0
        for j in range(w):
            ax = sum(X(i + j - k) for k in range(w)) / w
            ay = sum(Y(i + j - k) for k in range(w)) / w
            sx += 1.0 - (1.0 - ax) ** (r - 1) * (1.0 - ay) ** g
            sy += 1.0 - (1.0 - ax) ** r * (1.0 - ay) ** (g - 1)
        nx.append((sx / w) ** (l - 1))
        ny.append(eps * (sy / w) ** (g - 1))
    return np.array(nx), np.array(ny)


def exit_value(x, y, r, g, w, L):
    def X(i):
        return x[i + L] if -L <= i <= L else 0.0

    def Y(i):
        return y[i + L] if -L <= i <= L else 0.0

    total = 0.0
    for i in range(-L, L + 1):
        s = 0.0
        for j in range(w):
            ax = sum(X(i + j - k) for k in range(w)) / w
            ay = sum(Y(i + j - k) for k in range(w)) / w
            s += 1.0 - (1.0 - ax) ** r * (1.0 - ay) ** (g - 1)
        total += (s / w) ** g
    return total / (2 * L + 1)


def randomized_rate_by_counting(l: int, r: int, g: int, L: int, w: int) -> float:
    """Rate from expected node counts per unit section size.

    A check at position ``m`` draws each of its ``r+g`` sockets uniformly from
    sections ``m-w+1..m``; it keeps degree >= 1 unless every socket lands on a
    shortened section.
    """
    checks = 0.0
    for m in range(-L - w + 1, L + w):
        inside = sum(1 for s in range(m - w + 1, m + 1) if -L <= s <= L)
        checks += 1.0 - (1.0 - inside / w) ** (r + g)
    v_t = 2 * L + 1
    v_p = r / l * (2 * L + 1)
    return (v_t + v_p - checks) / v_t


def gf2_det(M) -> int:
    """Determinant mod 2 by exact integer elimination (Bareiss)."""
    A = [[int(v) for v in row] for row in np.asarray(M)]
    n = len(A)
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return (sign * A[n - 1][n - 1]) % 2 if n else 1

