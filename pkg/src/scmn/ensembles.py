"""Protograph base matrices and ensemble bookkeeping.

Band constructions follow the column-section layout: section ``t`` (0-based)
of ``H(l, r, Lhat, k)`` holds ``k`` identical columns with ones in rows
``t .. t+l-1``; ``S(g, W)`` puts ones in rows ``t .. t+g-1`` of column ``t``;
``V(l, r, Lhat, k)`` puts ones in rows ``k*t .. k*t+l-1`` of column ``t``.

All rates and densities are returned as exact :class:`fractions.Fraction`
values computed from node counts of the constructed base matrix.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import numpy as np


class Family(enum.Enum):
    REGULAR_LDPC = "regular"
    MN = "mn"
    HA = "ha"
    SC_LDPC = "sc-ldpc"
    SC_MN = "sc-mn"
    SC_HA = "sc-ha"
    RSC_MN = "rsc-mn"


COUPLED = (Family.SC_LDPC, Family.SC_MN, Family.SC_HA, Family.RSC_MN)


def _ratio(num: int, den: int, what: str) -> int:
    if den < 1 or num < 1 or num % den:
        raise ValueError(f"{what} must be a positive integer, got {num}/{den}")
    return num // den


@dataclass(frozen=True)
class EnsembleSpec:
    """Parameters of one ensemble.

    ``k`` is ``r/l`` for the LDPC-side families (REGULAR_LDPC, HA, SC_LDPC,
    SC_HA) and ``l/r`` for the MN-side families (MN, SC_MN, RSC_MN).
    ``L=None`` means the uncoupled ensemble or the ``Lhat -> infinity`` limit.
    """

    family: Family
    l: int
    r: int
    g: int = 0
    L: int | None = None
    w: int = 1

    def __post_init__(self):
        if not isinstance(self.family, Family):
            object.__setattr__(self, "family", Family(self.family))
        if self.l < 1 or self.r < 1:
            raise ValueError("degrees l and r must be >= 1")
        if self.g < 0:
            raise ValueError("g must be >= 0")
        if self.L is not None and self.L < 1:
            raise ValueError("coupling half-width L must be >= 1")
        if self.w < 1:
            raise ValueError("window w must be >= 1")
        # uncoupled MN/HA accept g=0 as descriptors; their base matrices still need g >= 1
        if self.family in (Family.SC_MN, Family.SC_HA, Family.RSC_MN):
            if self.g < 1:
                raise ValueError(f"{self.family.value} needs g >= 1")
        if self.family is not Family.RSC_MN:
            self.k  # validates divisibility

    @property
    def k(self) -> int:
        if self.family in (Family.MN, Family.SC_MN, Family.RSC_MN):
            return _ratio(self.l, self.r, "k = l/r")
        return _ratio(self.r, self.l, "k = r/l")

    @property
    def Lhat(self) -> int | None:
        return None if self.L is None else 2 * self.L + 1

    @property
    def is_coupled(self) -> bool:
        return self.family in COUPLED

    def with_L(self, L: int | None) -> EnsembleSpec:
        return EnsembleSpec(self.family, self.l, self.r, self.g, L, self.w)


@dataclass
class BaseMatrix:
    """Integer protograph adjacency matrix with a per-column puncture mask.

    ``entries[c, v]`` is the number of parallel edges between check ``c`` and
    variable ``v``; ``punctured[v]`` is true when variable ``v`` is not sent.
    """

    entries: np.ndarray
    punctured: np.ndarray = field(default=None)

    def __post_init__(self):
        self.entries = np.array(self.entries, dtype=np.int64, ndmin=2)
        if self.entries.ndim != 2:
            raise ValueError("entries must be a 2-D grid")
        if (self.entries < 0).any():
            raise ValueError("base-matrix entries must be non-negative")
        if self.punctured is None:
            self.punctured = np.zeros(self.cols, dtype=bool)
        self.punctured = np.asarray(self.punctured, dtype=bool).reshape(-1)
        if self.punctured.shape != (self.cols,):
            raise ValueError("puncture mask length must equal the column count")

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    @property
    def n_punctured(self) -> int:
        return int(self.punctured.sum())

    @property
    def n_transmitted(self) -> int:
        return self.cols - self.n_punctured

    @property
    def n_edges(self) -> int:
        return int(self.entries.sum())

    def column_weights(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def row_weights(self) -> np.ndarray:
        return self.entries.sum(axis=1)

    @cached_property
    def graph(self):
        # local import: protograph_de imports this module
        from .protograph_de import ProtographGraph

        return ProtographGraph.from_base(self)

    def __eq__(self, other):
        if not isinstance(other, BaseMatrix):
            return NotImplemented
        return (
            self.entries.shape == other.entries.shape
            and bool((self.entries == other.entries).all())
            and bool((self.punctured == other.punctured).all())
        )

    def to_text(self) -> str:
        lines = [f"{self.rows} {self.cols}", " ".join(str(int(p)) for p in self.punctured)]
        lines += [" ".join(str(v) for v in row) for row in self.entries.tolist()]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> BaseMatrix:
        lines = [ln for ln in text.splitlines() if ln.strip()]
        rows, cols = (int(t) for t in lines[0].split())
        punct = [int(t) for t in lines[1].split()]
        entries = [[int(t) for t in ln.split()] for ln in lines[2 : 2 + rows]]
        if len(punct) != cols or len(entries) != rows or any(len(e) != cols for e in entries):
            raise ValueError("malformed base-matrix text: dimensions do not match header")
        return cls(np.array(entries, dtype=np.int64).reshape(rows, cols), np.array(punct, dtype=bool))

    def to_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "punctured": [int(p) for p in self.punctured],
            "entries": self.entries.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> BaseMatrix:
        base = cls(np.array(data["entries"], dtype=np.int64).reshape(data["rows"], data["cols"]), data["punctured"])
        return base


def _band(rows: int, starts, weight: int) -> np.ndarray:
    starts = list(starts)
    out = np.zeros((rows, len(starts)), dtype=np.int64)
    for col, s in enumerate(starts):
        out[s : s + weight, col] = 1
    return out


def build_H(l: int, r: int, Lhat: int, k: int) -> BaseMatrix:
    """Band matrix of size ``(Lhat+l-1) x (k*Lhat)`` with column weight ``l``."""
    if min(l, r, Lhat, k) < 1:
        raise ValueError("build_H parameters must be >= 1")
    if r != k * l:
        raise ValueError(f"build_H needs r = k*l, got r={r}, k={k}, l={l}")
    starts = [t for t in range(Lhat) for _ in range(k)]
    return BaseMatrix(_band(Lhat + l - 1, starts, l))


def build_S(g: int, W: int) -> BaseMatrix:
    """Band matrix of size ``(W+g-1) x W``; column ``t`` covers rows ``t..t+g-1``."""
    if g < 1 or W < 1:
        raise ValueError("build_S parameters must be >= 1")
    return BaseMatrix(_band(W + g - 1, range(W), g))


def build_V(l: int, r: int, Lhat: int, k: int) -> BaseMatrix:
    """Band matrix of size ``(k*Lhat+l-2) x Lhat``; column ``t`` covers rows ``k*t..k*t+l-1``."""
    if min(l, r, Lhat, k) < 1:
        raise ValueError("build_V parameters must be >= 1")
    if l != k * r:
        raise ValueError(f"build_V needs l = k*r, got l={l}, k={k}, r={r}")
    rows = k * Lhat + l - 2
    if rows < k * (Lhat - 1) + l:
        # only reachable for k = 1 where the last band would be cut off
        raise ValueError("build_V needs k >= 2 so the last band fits")
    return BaseMatrix(_band(rows, (k * t for t in range(Lhat)), l))


def sc_ldpc_base(l: int, r: int, L: int) -> BaseMatrix:
    if L < 1:
        raise ValueError("L must be >= 1")
    return build_H(l, r, 2 * L + 1, _ratio(r, l, "k = r/l"))


def sc_mn_base(l: int, r: int, g: int, L: int) -> BaseMatrix:
    """``[V(l, r, Lhat, k) | S(g, k*Lhat+l-g-1)]`` with the V columns punctured."""
    if L < 1 or g < 1:
        raise ValueError("L and g must be >= 1")
    k = _ratio(l, r, "k = l/r")
    Lhat = 2 * L + 1
    width = k * Lhat + l - g - 1
    if width < 1:
        raise ValueError(f"S block width k*Lhat+l-g-1 = {width} must be >= 1")
    V = build_V(l, r, Lhat, k)
    S = build_S(g, width)
    assert V.rows == S.rows
    punct = np.r_[np.ones(Lhat, dtype=bool), np.zeros(width, dtype=bool)]
    return BaseMatrix(np.hstack([V.entries, S.entries]), punct)


def sc_ha_base(l: int, r: int, g: int, L: int) -> BaseMatrix:
    """``[[H, 0], [S(g, k*Lhat), I]]`` with the left ``k*Lhat`` columns punctured."""
    if L < 1 or g < 1:
        raise ValueError("L and g must be >= 1")
    k = _ratio(r, l, "k = r/l")
    Lhat = 2 * L + 1
    H = build_H(l, r, Lhat, k).entries
    S = build_S(g, k * Lhat).entries
    n_t = S.shape[0]
    top = np.hstack([H, np.zeros((H.shape[0], n_t), dtype=np.int64)])
    bottom = np.hstack([S, np.eye(n_t, dtype=np.int64)])
    punct = np.r_[np.ones(k * Lhat, dtype=bool), np.zeros(n_t, dtype=bool)]
    return BaseMatrix(np.vstack([top, bottom]), punct)


def regular_base(l: int, r: int) -> BaseMatrix:
    """Uncoupled (l, r)-regular ensemble as a ``1 x (r/l)`` matrix of ``l``'s."""
    k = _ratio(r, l, "k = r/l")
    return BaseMatrix(np.full((1, k), l, dtype=np.int64))


def mn_base(l: int, r: int, g: int) -> BaseMatrix:
    """Uncoupled (l, r, g)-MN ensemble.

    ``k = l/r`` checks share one punctured information node (``r`` edges to
    each check); each check also carries one parity node through ``g``
    parallel edges, so the two edge-type degrees match the multi-edge pair.
    """
    k = _ratio(l, r, "k = l/r")
    if g < 1:
        raise ValueError("MN needs g >= 1")
    entries = np.hstack([np.full((k, 1), r, dtype=np.int64), g * np.eye(k, dtype=np.int64)])
    return BaseMatrix(entries, np.r_[True, np.zeros(k, dtype=bool)])


def ha_base(l: int, r: int, g: int) -> BaseMatrix:
    """Uncoupled (l, r, g)-HA ensemble: one LDPC check over ``k = r/l`` state
    nodes, and per state node one LDGM check tying it to a transmitted bit."""
    k = _ratio(r, l, "k = r/l")
    if g < 1:
        raise ValueError("HA needs g >= 1")
    top = np.hstack([np.full((1, k), l, dtype=np.int64), np.zeros((1, k), dtype=np.int64)])
    bottom = np.hstack([g * np.eye(k, dtype=np.int64), np.eye(k, dtype=np.int64)])
    punct = np.r_[np.ones(k, dtype=bool), np.zeros(k, dtype=bool)]
    return BaseMatrix(np.vstack([top, bottom]), punct)


def base_matrix(spec: EnsembleSpec) -> BaseMatrix:
    f = spec.family
    if f is Family.REGULAR_LDPC:
        return regular_base(spec.l, spec.r)
    if f is Family.MN:
        return mn_base(spec.l, spec.r, spec.g)
    if f is Family.HA:
        return ha_base(spec.l, spec.r, spec.g)
    if spec.L is None:
        raise ValueError(f"{f.value} needs a finite L to build a base matrix")
    if f is Family.SC_LDPC:
        return sc_ldpc_base(spec.l, spec.r, spec.L)
    if f is Family.SC_MN:
        return sc_mn_base(spec.l, spec.r, spec.g, spec.L)
    if f is Family.SC_HA:
        return sc_ha_base(spec.l, spec.r, spec.g, spec.L)
    raise ValueError("the randomized SC-MN ensemble has no protograph base matrix")


def _counted_rate(base: BaseMatrix) -> Fraction:
    vp, vt, c = base.n_punctured, base.n_transmitted, base.rows
    return Fraction(vp + vt - c, vt)


def design_rate(spec: EnsembleSpec) -> Fraction:
    """Design rate ``(V_p + V_t - C) / V_t`` read off the base matrix.

    Closed forms: SC-MN ``(Lhat-g+1)/(k*Lhat+l-g-1)``, SC-HA
    ``((k-1)*Lhat-l+1)/(k*Lhat+g-1)``, SC-LDPC ``(k-1)/k - (l-1)/(k*Lhat)``.
    With ``L=None`` the large-``L`` limit is returned.
    """
    f = spec.family
    if f is Family.MN:
        return Fraction(spec.r, spec.l)
    if f is Family.HA:
        return 1 - Fraction(spec.l, spec.r)
    if f in (Family.REGULAR_LDPC, Family.RSC_MN):
        raise ValueError(f"design_rate does not cover {f.value}; use regular_rate / randomized_rate")
    if spec.L is None:
        k = spec.k
        return Fraction(1, k) if f is Family.SC_MN else Fraction(k - 1, k)
    return _counted_rate(base_matrix(spec))


def regular_rate(l: int, r: int) -> Fraction:
    return 1 - Fraction(l, r)


class Density(NamedTuple):
    exact: Fraction | None
    limit: Fraction


def density(spec: EnsembleSpec) -> Density:
    """Edges per information bit: finite-``L`` exact value and the ``Lhat -> inf`` limit.

    Every constructor output has exact column weights, so the edge count of
    the base matrix equals ``l*V_p + g*V_t`` (SC-MN) or
    ``(l+g)*V_p + V_t`` (SC-HA).
    """
    if spec.family is Family.SC_MN:
        limit = Fraction(spec.l + spec.g * spec.k)
    elif spec.family is Family.SC_HA:
        k = spec.k
        if k < 2:
            raise ValueError("SC-HA density needs k >= 2 (rate (k-1)/k > 0)")
        limit = Fraction(k, k - 1) * (1 + spec.g + spec.l)
    else:
        raise ValueError("density is defined for SC-MN and SC-HA only")
    exact = None
    if spec.L is not None:
        base = base_matrix(spec)
        rate = _counted_rate(base)
        exact = Fraction(base.n_edges) / (rate * base.n_transmitted) if rate > 0 else None
    return Density(exact, limit)


Monomial = tuple[int, ...]


@dataclass(frozen=True)
class DegreeDistributionPair:
    """Multi-edge degree distribution pair.

    ``nu`` keys are ``(channel_exponent, e_1, ..., e_m)``; ``mu`` keys are
    ``(e_1, ..., e_m)`` with one exponent per edge type.
    """

    nu: dict[Monomial, Fraction]
    mu: dict[Monomial, Fraction]

    def nu_coefficient(self, channel: int, *exponents: int) -> Fraction:
        return self.nu.get((channel, *exponents), Fraction(0))

    def mu_coefficient(self, *exponents: int) -> Fraction:
        return self.mu.get(tuple(exponents), Fraction(0))


def degree_distribution(spec: EnsembleSpec) -> DegreeDistributionPair:
    l, r, g = spec.l, spec.r, spec.g
    if spec.family is Family.MN:
        nu = {(0, l, 0): Fraction(r, l)}
        if g > 0:
            nu[(1, 0, g)] = Fraction(1)
        return DegreeDistributionPair(nu, {(r, g): Fraction(1)})
    if spec.family is Family.HA:
        nu = {(0, l, g, 0): Fraction(1), (1, 0, 0, 1): Fraction(1)}
        mu = {(r, 0, 0): Fraction(l, r), (0, g, 1): Fraction(1)}
        return DegreeDistributionPair(nu, mu)
    raise ValueError("degree distributions are defined for MN and HA only")


def randomized_rate(l: int, r: int, g: int, L: int, w: int) -> float:
    """Design rate of the randomized (l, r, g, L, w) SC-MN ensemble.

    ``r/l + (1 + w - 2*sum_{i=0}^{w} (1 - (i/w)^r (i/w)^g)) / Lhat``; tends
    to ``r/l`` as ``Lhat`` grows. Evaluated in exact arithmetic; needs
    ``w <= Lhat``.
    """
    if w < 1 or L < 1:
        raise ValueError("w and L must be >= 1")
    Lhat = 2 * L + 1
    if w > Lhat:
        # the closed form assumes every boundary window overlaps only one chain end
        raise ValueError(f"window w={w} exceeds the chain length Lhat={Lhat}")
    total = sum(1 - Fraction(i, w) ** r * Fraction(i, w) ** g for i in range(w + 1))
    return float(Fraction(r, l) + (1 + w - 2 * total) / Lhat)
