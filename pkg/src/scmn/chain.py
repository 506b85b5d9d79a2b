"""Section-indexed density evolution for the randomized (l, r, g, L, w) SC-MN ensemble.

Sections ``-L..L`` are stored at array positions ``0..2L``. Sections outside
the chain are shortened (known zeros) and read as erasure probability 0.
Information nodes at section ``i`` attach uniformly to checks ``i..i+w-1``;
a check at position ``m`` therefore averages sections ``m-w+1..m``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .protograph_de import MAX_ITERS, STALL_TOL, TOL_EPS, TOL_MSG, ThresholdResult, bisect_threshold


@dataclass
class ChainProfile:
    L: int
    w: int
    x: np.ndarray = field(default=None)
    y: np.ndarray = field(default=None)
    eps: float = 1.0

    def __post_init__(self):
        n = 2 * self.L + 1
        self.x = np.ones(n) if self.x is None else np.array(self.x, dtype=float)
        self.y = np.ones(n) if self.y is None else np.array(self.y, dtype=float)
        if self.x.shape != (n,) or self.y.shape != (n,):
            raise ValueError(f"profile vectors must have length 2L+1 = {n}")

    @property
    def sections(self) -> np.ndarray:
        return np.arange(-self.L, self.L + 1)

    @property
    def Lhat(self) -> int:
        return 2 * self.L + 1

    def copy(self) -> ChainProfile:
        return replace(self, x=self.x.copy(), y=self.y.copy())

    def max(self) -> float:
        return float(max(self.x.max(), self.y.max()))

    def reflected(self) -> ChainProfile:
        return replace(self, x=self.x[::-1].copy(), y=self.y[::-1].copy())

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["section", "x", "y"])
        for i, xi, yi in zip(self.sections, self.x, self.y):
            writer.writerow([int(i), repr(float(xi)), repr(float(yi))])
        return buf.getvalue()

    @classmethod
    def zeros(cls, L: int, w: int, eps: float = 0.0) -> ChainProfile:
        n = 2 * L + 1
        return cls(L, w, np.zeros(n), np.zeros(n), eps)


def chain_sweep(p: ChainProfile, l: int, r: int, g: int) -> ChainProfile:
    """Apply both section updates once, at the profile's own ``eps``."""
    out = p.copy()
    _kernels.chain_sweep(p.x, p.y, float(p.eps), l, r, g, p.w, out.x, out.y)
    return out


def fixed_point_residual(p: ChainProfile, l: int, r: int, g: int) -> float:
    q = chain_sweep(p, l, r, g)
    return float(max(np.abs(q.x - p.x).max(), np.abs(q.y - p.y).max()))


@dataclass
class ChainRun:
    converged: bool
    profile: ChainProfile
    iterations: int
    status: int


def chain_run(l: int, r: int, g: int, L: int, w: int, eps: float, tol: float = TOL_MSG,
              max_iters: int = MAX_ITERS, stall_tol: float = STALL_TOL,
              start: ChainProfile | None = None) -> ChainRun:
    """Forward DE from the all-ones interior profile (or ``start``)."""
    p = ChainProfile(L, w, eps=eps) if start is None else replace(start.copy(), eps=eps)
    status, iters = _kernels.chain_run(p.x, p.y, float(eps), l, r, g, w, int(max_iters),
                                       float(tol), float(stall_tol))
    return ChainRun(status == _kernels.CONVERGED, p, int(iters), int(status))


def chain_threshold(l: int, r: int, g: int, L: int, w: int, tol_eps: float = TOL_EPS,
                    tol_msg: float = TOL_MSG, max_iters: int = MAX_ITERS,
                    stall_tol: float = STALL_TOL) -> ThresholdResult:
    def probe(eps):
        run = chain_run(l, r, g, L, w, eps, tol_msg, max_iters, stall_tol)
        return run.converged, run.iterations

    return bisect_threshold(probe, tol_eps)
