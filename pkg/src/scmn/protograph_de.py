"""Density evolution over the BEC on protograph base matrices.

Messages live on the nonzero base-matrix entries (row-major order). An entry
holding ``m`` parallel edges carries one shared value and contributes ``m``
slots to the products at both of its endpoints; leave-one-out products drop
exactly one slot.

Decoding success is judged on the a-posteriori erasure probability of every
variable node (channel value times all incoming check messages). Degree-1
transmitted nodes, such as the identity block of SC-HA, keep an outgoing
message equal to the channel erasure forever, so a criterion on raw messages
would never fire there.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .ensembles import BaseMatrix

TOL_MSG = 1e-10
TOL_EPS = 1e-7
MAX_ITERS = 100_000
STALL_TOL = 1e-15


@dataclass(frozen=True)
class ProtographGraph:
    """Slot-level adjacency compiled from a :class:`BaseMatrix`."""

    rows: np.ndarray  # check index of each entry
    cols: np.ndarray  # variable index of each entry
    mult: np.ndarray
    var_ptr: np.ndarray
    var_slots: np.ndarray
    chk_ptr: np.ndarray
    chk_slots: np.ndarray
    punctured: np.ndarray

    @classmethod
    def from_base(cls, base: BaseMatrix) -> ProtographGraph:
        rows, cols = np.nonzero(base.entries)
        mult = base.entries[rows, cols]
        if (base.column_weights() == 0).any() or (base.row_weights() == 0).any():
            raise ValueError("every row and column of the base matrix needs at least one edge")
        edge_ids = np.repeat(np.arange(rows.size), mult)
        # stable sorts keep slots of one node in row-major entry order
        by_var = edge_ids[np.argsort(cols[edge_ids], kind="stable")]
        by_chk = edge_ids[np.argsort(rows[edge_ids], kind="stable")]
        var_ptr = np.r_[0, np.cumsum(base.column_weights())]
        chk_ptr = np.r_[0, np.cumsum(base.row_weights())]
        return cls(rows, cols, mult, var_ptr.astype(np.int64), by_var.astype(np.int64),
                   chk_ptr.astype(np.int64), by_chk.astype(np.int64), base.punctured.copy())

    @property
    def n_entries(self) -> int:
        return self.rows.size

    def channel(self, eps: float) -> np.ndarray:
        return np.where(self.punctured, 1.0, float(eps))


@dataclass
class EdgeMessages:
    """Per-entry erasure probabilities, variable-to-check and check-to-variable."""

    v2c: np.ndarray
    c2v: np.ndarray

    @classmethod
    def ones(cls, base: BaseMatrix) -> EdgeMessages:
        n = base.graph.n_entries
        return cls(np.ones(n), np.ones(n))

    def max(self) -> float:
        return float(max(self.v2c.max(), self.c2v.max()))

    def copy(self) -> EdgeMessages:
        return EdgeMessages(self.v2c.copy(), self.c2v.copy())


@dataclass(frozen=True)
class ThresholdResult:
    epsilon_bp: float
    iterations_at_threshold: int
    bracket_width: float
    has_threshold: bool = True


@dataclass
class DERun:
    converged: bool
    messages: EdgeMessages
    iterations: int
    status: int
    trace: np.ndarray | None = None


def de_sweep(base: BaseMatrix, msgs: EdgeMessages, eps: float) -> EdgeMessages:
    """One synchronous BEC update: ``v2c`` from the incoming ``c2v``, then ``c2v`` from the new ``v2c``.

    ``v2c = eps_v * prod(other c2v slots)`` with ``eps_v = 1`` on punctured
    columns, and ``c2v = 1 - prod(1 - other v2c slots)``.
    """
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1]")
    G = base.graph
    width = int(max(np.diff(G.var_ptr).max(), np.diff(G.chk_ptr).max()))
    out = EdgeMessages(np.empty(G.n_entries), np.empty(G.n_entries))
    _kernels.proto_sweep(np.asarray(msgs.c2v, dtype=float), G.channel(eps), G.var_ptr, G.var_slots,
                         G.chk_ptr, G.chk_slots, out.v2c, out.c2v, np.empty(width), np.empty(width))
    return out


def a_posteriori(base: BaseMatrix, msgs: EdgeMessages, eps: float) -> np.ndarray:
    """Per-variable erasure probability after combining the channel with all check messages."""
    G = base.graph
    out = np.empty(base.cols)
    _kernels.proto_app(np.asarray(msgs.c2v, dtype=float), G.channel(eps), G.var_ptr, G.var_slots, out)
    return out


def de_run(base: BaseMatrix, eps: float, tol: float = TOL_MSG, max_iters: int = MAX_ITERS,
           stall_tol: float = STALL_TOL, trace: bool = False, start: EdgeMessages | None = None) -> DERun:
    if tol <= 0:
        raise ValueError("tol must be positive")
    G = base.graph
    msgs = EdgeMessages.ones(base) if start is None else start.copy()
    buf = np.empty(max_iters if trace else 0)
    status, iters = _kernels.proto_run(msgs.v2c, msgs.c2v, G.channel(eps), G.var_ptr, G.var_slots,
                                       G.chk_ptr, G.chk_slots, int(max_iters), float(tol),
                                       float(stall_tol), buf)
    return DERun(status == _kernels.CONVERGED, msgs, int(iters), int(status),
                 buf[:iters].copy() if trace else None)


def de_converges(base: BaseMatrix, eps: float, tol: float = TOL_MSG, max_iters: int = MAX_ITERS,
                 stall_tol: float = STALL_TOL) -> tuple[bool, EdgeMessages, int]:
    """Run DE from the all-ones state; ``True`` once every a-posteriori erasure is below ``tol``."""
    run = de_run(base, eps, tol, max_iters, stall_tol)
    return run.converged, run.messages, run.iterations


def bisect_threshold(converges, tol_eps: float) -> ThresholdResult:
    """Bisection for the largest ``eps`` in [0, 1] where ``converges(eps)`` holds.

    ``converges`` returns ``(ok, iterations)`` and must be monotone in eps.
    """
    ok, iters = converges(0.0)
    if not ok:
        return ThresholdResult(0.0, iters, 0.0, has_threshold=False)
    ok_hi, iters_hi = converges(1.0)
    if ok_hi:
        return ThresholdResult(1.0, iters_hi, 0.0)
    lo, hi, lo_iters = 0.0, 1.0, iters
    while hi - lo > tol_eps:
        mid = 0.5 * (lo + hi)
        ok, iters = converges(mid)
        if ok:
            lo, lo_iters = mid, iters
        else:
            hi = mid
    return ThresholdResult(0.5 * (lo + hi), lo_iters, hi - lo)


def bp_threshold(base: BaseMatrix, tol_eps: float = TOL_EPS, tol_msg: float = TOL_MSG,
                 max_iters: int = MAX_ITERS, stall_tol: float = STALL_TOL) -> ThresholdResult:
    """BP threshold of a protograph ensemble by bisection over the channel erasure probability.

    Ensembles that fail even on the noiseless channel (uncoupled MN and HA)
    return ``has_threshold=False`` and ``epsilon_bp=0``.
    """
    def probe(eps):
        run = de_run(base, eps, tol_msg, max_iters, stall_tol)
        return run.converged, run.iterations

    return bisect_threshold(probe, tol_eps)


def trace_csv(trace: np.ndarray) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iter", "max_msg"])
    for i, v in enumerate(trace, start=1):
        writer.writerow([i, repr(float(v))])
    return buf.getvalue()

