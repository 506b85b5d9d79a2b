"""EBP EXIT curves of the randomized SC-MN ensemble by anchored continuation.

Each curve point is a non-trivial DE fixed point. The parity update is
linear in the channel parameter, so fixing the mean parity erasure
``(1/Lhat) sum_i y_i`` (the anchor) and solving for ``eps`` each sweep gives
an exact rescaling. Anchors are swept downwards with warm starts, which
follows the curve through the folds (wiggles) where it turns back in ``eps``.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .chain import ChainProfile, chain_run, fixed_point_residual

log = logging.getLogger(__name__)

FP_TOL = 1e-11
FP_MAX_ITERS = 100_000
STEP = 1e-3
MAX_EPS_JUMP = 1e-3
CLIFF_FLOOR = 0.05
CLAMP_SLACK = 1e-9


class ContinuationError(RuntimeError):
    """Anchored iteration did not settle; ``point`` holds the last state and ``curve`` the partial trace."""

    def __init__(self, message, point=None, curve=None):
        super().__init__(message)
        self.point = point
        self.curve = curve


class AnchorInfeasible(ContinuationError):
    """The parity bracket mean vanished, so no ``eps`` reaches the anchor."""


def h_ebp(p: ChainProfile, l: int, r: int, g: int) -> float:
    """EBP EXIT value ``(1/Lhat) sum_i ((1/w) sum_j [1 - (1-X)^r (1-Y)^(g-1)])^g``."""
    bx = np.empty(p.x.size)
    by = np.empty(p.x.size)
    _kernels.chain_brackets(p.x, p.y, r, g, p.w, bx, by)
    return float(np.mean(by**g))


@dataclass
class EBPPoint:
    eps: float
    h_ebp: float
    profile: ChainProfile
    anchor: float
    residual: float
    iterations: int = 0
    clamped: bool = False


@dataclass
class EBPCurve:
    l: int
    r: int
    g: int
    L: int
    w: int
    points: list[EBPPoint] = field(default_factory=list)

    @property
    def eps(self) -> np.ndarray:
        return np.array([p.eps for p in self.points])

    @property
    def h(self) -> np.ndarray:
        return np.array([p.h_ebp for p in self.points])

    @property
    def anchors(self) -> np.ndarray:
        return np.array([p.anchor for p in self.points])

    @property
    def residuals(self) -> np.ndarray:
        return np.array([p.residual for p in self.points])

    def y_traces(self) -> np.ndarray:
        """``(points, sections)`` array of parity erasures, sections ``-L..L``."""
        return np.array([p.profile.y for p in self.points]).reshape(len(self.points), 2 * self.L + 1)

    def cliff_epsilon(self) -> float:
        """Smallest ``eps`` over the non-trivial fixed points, i.e. where the cliff drops."""
        return float(self.eps.min())

    def rows(self):
        for p in self.points:
            yield [repr(p.anchor), repr(p.eps), repr(p.h_ebp), repr(p.residual)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["anchor", "eps", "h_ebp", "residual"])
        writer.writerows(self.rows())
        return buf.getvalue()

    def to_wide_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["anchor"] + [f"y_{i}" for i in range(-self.L, self.L + 1)])
        for p in self.points:
            writer.writerow([repr(p.anchor)] + [repr(float(v)) for v in p.profile.y])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "l": self.l, "r": self.r, "g": self.g, "L": self.L, "w": self.w,
            "points": [
                {"anchor": p.anchor, "eps": p.eps, "h_ebp": p.h_ebp, "residual": p.residual,
                 "y": [float(v) for v in p.profile.y]}
                for p in self.points
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"


def anchored_fixed_point(l: int, r: int, g: int, L: int, w: int, anchor_target: float,
                         seed_profile: ChainProfile | None = None, tol: float = FP_TOL,
                         max_iters: int = FP_MAX_ITERS) -> EBPPoint:
    """Non-trivial fixed point whose mean parity erasure equals ``anchor_target``.

    The returned ``eps`` is clamped to [0, 1]; ``clamped`` flags points where
    the anchor would need ``eps > 1`` (the curve has left the channel range).
    """
    if not 0.0 < anchor_target <= 1.0:
        raise ValueError("anchor_target must lie in (0, 1]")
    p = ChainProfile(L, w) if seed_profile is None else seed_profile.copy()
    if p.L != L or p.w != w:
        raise ValueError("seed profile does not match (L, w)")
    status, iters, eps, raw = _kernels.anchored_run(p.x, p.y, float(anchor_target), l, r, g, w,
                                                    int(max_iters), float(tol))
    p.eps = float(eps)
    point = EBPPoint(float(eps), h_ebp(p, l, r, g), p, float(anchor_target),
                     fixed_point_residual(p, l, r, g), int(iters), bool(raw > 1.0 + CLAMP_SLACK))
    if status == _kernels.INFEASIBLE:
        raise AnchorInfeasible(f"anchor {anchor_target:g}: parity bracket mean is zero", point)
    if status != _kernels.CONVERGED:
        raise ContinuationError(f"anchor {anchor_target:g}: no convergence in {max_iters} sweeps", point)
    return point


def trace_curve(l: int, r: int, g: int, L: int, w: int, anchor_grid=None, step: float = STEP,
                max_eps_jump: float = MAX_EPS_JUMP, min_step: float | None = None,
                tol: float = FP_TOL, max_iters: int = FP_MAX_ITERS) -> EBPCurve:
    """Trace the EBP curve from the top (forward-DE stall at ``eps = 1``) down the cliff.

    The default grid starts at the mean parity erasure of that stall state
    and descends in steps of ``step``. Whenever consecutive points differ in
    ``eps`` by more than ``max_eps_jump``, the gap is bisected in anchor
    space down to ``min_step`` (default ``step / 64``). Tracing ends at the
    first point that needs ``eps > 1``.
    """
    seed = chain_run(l, r, g, L, w, 1.0).profile
    top = float(seed.y.mean())
    if anchor_grid is None:
        n = int(np.floor(top / step))
        anchor_grid = top - step * np.arange(n)
    grid = [float(a) for a in anchor_grid if 0.0 < a <= 1.0]
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("anchor grid must be strictly decreasing")
    if min_step is None:
        min_step = step / 64
    curve = EBPCurve(l, r, g, L, w)
    pending = grid[::-1]  # pop from the end
    prev = None
    while pending:
        target = pending[-1]
        seed_profile = seed if prev is None else prev.profile
        can_refine = prev is not None and prev.anchor - target > 2 * min_step
        try:
            point = anchored_fixed_point(l, r, g, L, w, target, seed_profile, tol, max_iters)
        except ContinuationError as exc:
            if can_refine:
                pending.append(0.5 * (prev.anchor + target))
                continue
            if prev is not None and prev.h_ebp < CLIFF_FLOOR:
                # bottom terminus: the branch merges into the trivial fixed point
                break
            exc.curve = curve
            raise
        if can_refine and abs(point.eps - prev.eps) > max_eps_jump:
            pending.append(0.5 * (prev.anchor + target))
            continue
        pending.pop()
        if point.clamped and curve.points:
            break
        if prev is not None and point.h_ebp > prev.h_ebp + 1e-12:
            log.warning("h_ebp increased along the curve at anchor %.6g (%.3g)", target, point.h_ebp - prev.h_ebp)
        curve.points.append(point)
        prev = point
    return curve


def turning_points(values) -> np.ndarray:
    """Indices of strict interior local extrema (plateaus collapsed)."""
    v = np.asarray(values, dtype=float)
    if v.size < 3:
        return np.array([], dtype=int)
    keep = np.r_[True, np.diff(v) != 0]
    idx = np.nonzero(keep)[0]
    u = v[idx]
    d = np.diff(u)
    turns = np.nonzero(d[:-1] * d[1:] < 0)[0] + 1
    return idx[turns]


def extrema_amplitude(values) -> float:
    """Largest gap between adjacent local extrema; 0 for a monotone sequence."""
    v = np.asarray(values, dtype=float)
    t = turning_points(v)
    if t.size < 2:
        return 0.0
    return float(np.abs(np.diff(v[t])).max())


def cliff_region(curve: EBPCurve, floor: float = CLIFF_FLOOR) -> slice:
    """Slice of curve points between the knee and the last point with ``h >= floor``.

    The knee is the point farthest from the chord joining the top of the curve
    and the bottom of the region, in coordinates scaled to the unit square.
    """
    eps, h = curve.eps, curve.h
    inside = np.nonzero(h >= floor)[0]
    if inside.size < 3:
        return slice(0, 0)
    end = int(inside[-1])
    e, hh = eps[: end + 1], h[: end + 1]
    span_e = np.ptp(e) or 1.0
    span_h = np.ptp(hh) or 1.0
    pe = (e - e.min()) / span_e
    ph = (hh - hh.min()) / span_h
    a = np.array([pe[0], ph[0]])
    b = np.array([pe[-1], ph[-1]])
    chord = b - a
    norm = np.hypot(*chord)
    if norm == 0:
        return slice(0, end + 1)
    dist = np.abs(chord[0] * (ph - a[1]) - chord[1] * (pe - a[0])) / norm
    return slice(int(np.argmax(dist)), end + 1)


def wiggle_amplitude(curve: EBPCurve, floor: float = CLIFF_FLOOR) -> float:
    """Largest ``eps`` swing between adjacent local extrema on the cliff."""
    if len(curve.points) < 3:
        return 0.0
    return extrema_amplitude(curve.eps[cliff_region(curve, floor)])
