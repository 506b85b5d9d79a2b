"""Dense GF(2) matrices for finite MN / HA instances.

Matrices are plain ``numpy.uint8`` arrays with values in {0, 1}. The helpers
here sample regular binary matrices, invert over GF(2) and build the MN
generator and the HA parity-check matrix, which coincide when the HA
ingredients are the transposed MN ingredients.
"""

from __future__ import annotations

import numpy as np

MAX_ATTEMPTS = 1000


class SingularError(ValueError):
    """Raised when a square GF(2) matrix has rank below its size."""


class SamplingError(RuntimeError):
    """Raised when a regular matrix cannot be drawn within the retry cap."""


def as_gf2(M) -> np.ndarray:
    return np.asarray(M, dtype=np.uint8) % 2


def gf2_matmul(A, B) -> np.ndarray:
    A, B = as_gf2(A), as_gf2(B)
    if A.shape[-1] != B.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    return ((A.astype(np.int64) @ B.astype(np.int64)) % 2).astype(np.uint8)


def gf2_rank(M) -> int:
    R = as_gf2(M).copy()
    rows, cols = R.shape
    rank = 0
    for col in range(cols):
        if rank == rows:
            break
        pivots = np.nonzero(R[rank:, col])[0]
        if pivots.size == 0:
            continue
        p = rank + pivots[0]
        if p != rank:
            R[[rank, p]] = R[[p, rank]]
        mask = R[:, col].astype(bool)
        mask[rank] = False
        R[mask] ^= R[rank]
        rank += 1
    return rank


def gf2_inverse(M) -> np.ndarray:
    """Gauss-Jordan inverse over GF(2); raises :class:`SingularError`."""
    M = as_gf2(M)
    n, m = M.shape
    if n != m:
        raise ValueError(f"cannot invert a non-square {n}x{m} matrix")
    aug = np.hstack([M, np.eye(n, dtype=np.uint8)])
    for col in range(n):
        pivots = np.nonzero(aug[col:, col])[0]
        if pivots.size == 0:
            raise SingularError(f"matrix is singular over GF(2) (no pivot in column {col})")
        p = col + pivots[0]
        if p != col:
            aug[[col, p]] = aug[[p, col]]
        mask = aug[:, col].astype(bool)
        mask[col] = False
        aug[mask] ^= aug[col]
    return aug[:, n:].copy()


def sample_regular(rows: int, cols: int, col_weight: int, row_weight: int, seed=None,
                   max_attempts: int = MAX_ATTEMPTS) -> np.ndarray:
    """Random binary matrix with exact row and column weights.

    Configuration model: column sockets are matched to a random permutation
    of row sockets; a draw containing a repeated (row, col) pair is rejected
    and redrawn, at most ``max_attempts`` times.
    """
    if min(rows, cols, col_weight, row_weight) < 1:
        raise ValueError("sizes and weights must be >= 1")
    if rows * row_weight != cols * col_weight:
        raise ValueError(
            f"infeasible weights: rows*row_weight={rows * row_weight} != cols*col_weight={cols * col_weight}"
        )
    if col_weight > rows or row_weight > cols:
        raise ValueError("weights exceed the matrix dimensions")
    rng = np.random.default_rng(seed)
    col_sockets = np.repeat(np.arange(cols), col_weight)
    row_sockets = np.repeat(np.arange(rows), row_weight)
    for _ in range(max_attempts):
        perm = rng.permutation(row_sockets)
        flat = perm * cols + col_sockets
        if np.unique(flat).size == flat.size:
            M = np.zeros(rows * cols, dtype=np.uint8)
            M[flat] = 1
            return M.reshape(rows, cols)
    raise SamplingError(f"no simple {rows}x{cols} matrix after {max_attempts} attempts")


def sample_invertible_regular(n: int, weight: int, seed=None, max_attempts: int = MAX_ATTEMPTS) -> np.ndarray:
    """Square ``weight``-regular matrix that is invertible over GF(2).

    Even ``weight`` is rejected: every row sum is even so the rows add to 0.
    """
    if weight % 2 == 0:
        raise SingularError("an even-weight regular square matrix is always singular over GF(2)")
    rng = np.random.default_rng(seed)
    for _ in range(max_attempts):
        M = sample_regular(n, n, weight, weight, rng)
        if gf2_rank(M) == n:
            return M
    raise SamplingError(f"no invertible {n}x{n} matrix after {max_attempts} attempts")


def mn_generator(H1, H2) -> np.ndarray:
    """``G = H1^T (H2^{-1})^T``; codewords are ``n = G^T s = H2^{-1} H1 s``."""
    H1, H2 = as_gf2(H1), as_gf2(H2)
    if H2.shape != (H1.shape[0], H1.shape[0]):
        raise ValueError(f"H2 must be {H1.shape[0]}x{H1.shape[0]}, got {H2.shape}")
    return gf2_matmul(H1.T, gf2_inverse(H2).T)


def ha_parity_check(H3, H4) -> np.ndarray:
    """``H_HA = H3^T (H4^T)^{-1}``."""
    H3, H4 = as_gf2(H3), as_gf2(H4)
    if H4.shape != (H3.shape[0], H3.shape[0]):
        raise ValueError(f"H4 must be {H3.shape[0]}x{H3.shape[0]}, got {H4.shape}")
    return gf2_matmul(H3.T, gf2_inverse(H4.T))


def mn_encode(H1, H2, s) -> np.ndarray:
    return gf2_matmul(gf2_inverse(H2), gf2_matmul(H1, np.asarray(s).reshape(-1, 1))).reshape(-1)


def to_text(M) -> str:
    M = as_gf2(M)
    lines = [f"{M.shape[0]} {M.shape[1]}"] + [" ".join(str(v) for v in row) for row in M.tolist()]
    return "\n".join(lines) + "\n"


def from_text(text: str) -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    rows, cols = (int(t) for t in lines[0].split())
    data = [[int(t) for t in ln.split()] for ln in lines[1 : 1 + rows]]
    if len(data) != rows or any(len(row) != cols for row in data):
        raise ValueError("malformed matrix text: dimensions do not match header")
    M = np.array(data, dtype=np.int64).reshape(rows, cols)
    if ((M != 0) & (M != 1)).any():
        raise ValueError("GF(2) matrix text may only contain 0 and 1")
    return M.astype(np.uint8)
