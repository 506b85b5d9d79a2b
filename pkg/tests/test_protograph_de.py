import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import edge_level_sweep, scalar_regular_step
from scmn._kernels import CONVERGED, STALLED
from scmn.ensembles import BaseMatrix, mn_base, regular_base, sc_ha_base, sc_ldpc_base, sc_mn_base
from scmn.protograph_de import (EdgeMessages, a_posteriori, bisect_threshold, bp_threshold, de_converges, de_run,
                                de_sweep, trace_csv)


@st.composite
def small_bases(draw):
    rows = draw(st.integers(1, 4))
    cols = draw(st.integers(1, 5))
    entries = draw(arrays(np.int64, (rows, cols), elements=st.integers(0, 3)))
    # every row and column needs an edge
    for c in range(rows):
        if not entries[c].any():
            entries[c, draw(st.integers(0, cols - 1))] = 1
    for v in range(cols):
        if not entries[:, v].any():
            entries[draw(st.integers(0, rows - 1)), v] = 1
    punctured = draw(arrays(np.bool_, cols))
    return BaseMatrix(entries, punctured)


@given(base=small_bases(), eps=st.floats(0, 1), data=st.data())
def test_sweep_matches_edge_level_oracle(base, eps, data):
    n = base.graph.n_entries
    c2v = np.array(data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n)))
    got = de_sweep(base, EdgeMessages(np.ones(n), c2v), eps)
    want_v2c, want_c2v = edge_level_sweep(base.entries, base.punctured, c2v, eps)
    np.testing.assert_allclose(got.v2c, want_v2c, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(got.c2v, want_c2v, rtol=1e-12, atol=1e-15)


@given(l=st.integers(2, 6), k=st.integers(2, 4), eps=st.floats(0, 1), iters=st.integers(1, 40))
def test_regular_reduces_to_scalar_recursion(l, k, eps, iters):
    base = regular_base(l, k * l)
    msgs = EdgeMessages.ones(base)
    x = 1.0
    for _ in range(iters):
        msgs = de_sweep(base, msgs, eps)
        x = scalar_regular_step(x, eps, l, k * l)
        np.testing.assert_allclose(msgs.v2c, x, rtol=1e-12, atol=1e-14)


def test_scalar_reduction_3_6_explicit():
    base = BaseMatrix([[3, 3]])
    msgs = EdgeMessages.ones(base)
    eps = 0.41
    x = 1.0
    for _ in range(25):
        x = eps * (1 - (1 - x) ** 5) ** 2
        msgs = de_sweep(base, msgs, eps)
        np.testing.assert_allclose(msgs.v2c, x, rtol=1e-12, atol=1e-14)


def test_absorbing_zero():
    base = sc_ldpc_base(3, 6, 2)
    n = base.graph.n_entries
    out = de_sweep(base, EdgeMessages(np.ones(n), np.zeros(n)), 0.7)
    assert not out.v2c.any()


def test_mn_information_messages_stay_one():
    base = mn_base(4, 2, 2)
    out = de_sweep(base, EdgeMessages.ones(base), 0.3)
    info = base.graph.cols == 0
    assert (out.v2c[info] == 1.0).all()
    assert np.allclose(out.v2c[~info], 0.3)


def test_eps_out_of_range():
    base = regular_base(3, 6)
    with pytest.raises(ValueError):
        de_sweep(base, EdgeMessages.ones(base), 1.5)


class TestConvergence:
    def test_sc_ldpc_3_6_1_below_threshold(self):
        ok, msgs, iters = de_converges(sc_ldpc_base(3, 6, 1), 0.70)
        assert ok and iters > 0

    def test_eps_zero_unpunctured(self):
        ok, _, iters = de_converges(sc_ldpc_base(3, 6, 4), 0.0)
        assert ok and iters <= 3

    def test_uncoupled_mn_fails_at_zero(self):
        ok, msgs, _ = de_converges(mn_base(4, 2, 2), 0.0)
        assert not ok

    def test_stall_above_threshold(self):
        run = de_run(regular_base(3, 6), 0.45)
        assert run.status == STALLED and not run.converged

    def test_tol_must_be_positive(self):
        with pytest.raises(ValueError):
            de_run(regular_base(3, 6), 0.3, tol=0.0)


@pytest.mark.parametrize("base,eps", [
    (sc_ldpc_base(3, 6, 2), 0.6),
    (sc_mn_base(4, 2, 2, 2), 0.57),
    (sc_ha_base(2, 4, 2, 2), 0.6),
    (regular_base(3, 6), 0.5),
])
def test_messages_non_increasing(base, eps):
    msgs = EdgeMessages.ones(base)
    for _ in range(200):
        nxt = de_sweep(base, msgs, eps)
        assert (nxt.v2c <= msgs.v2c + 1e-15).all()
        assert (nxt.c2v <= msgs.c2v + 1e-15).all()
        assert nxt.v2c.min() >= 0 and nxt.c2v.max() <= 1
        msgs = nxt


@given(e1=st.floats(0.3, 0.9), e2=st.floats(0.3, 0.9), sweeps=st.integers(1, 300))
def test_channel_monotonicity(e1, e2, sweeps):
    lo, hi = sorted((e1, e2))
    base = sc_mn_base(4, 2, 2, 2)
    a = b = EdgeMessages.ones(base)
    for _ in range(sweeps):
        a, b = de_sweep(base, a, lo), de_sweep(base, b, hi)
    assert (a.v2c <= b.v2c + 1e-15).all()
    assert (a.c2v <= b.c2v + 1e-15).all()


@pytest.mark.parametrize("base,split", [
    (sc_mn_base(4, 2, 2, 3), 7),
    (sc_ha_base(2, 4, 2, 3), 14),
    (sc_ldpc_base(3, 6, 3), 0),
], ids=["sc-mn", "sc-ha", "sc-ldpc"])
@pytest.mark.parametrize("eps", [0.45, 0.6, 0.8])
def test_reflection_symmetry(base, split, eps):
    # each column block is a band that maps onto itself under section reversal
    app = a_posteriori(base, de_run(base, eps, max_iters=3000).messages, eps)
    for block in (app[:split], app[split:]):
        np.testing.assert_allclose(block, block[::-1], rtol=1e-10, atol=1e-14)


class TestThreshold:
    def test_regular_3_6(self):
        assert abs(bp_threshold(regular_base(3, 6)).epsilon_bp - 0.4294) <= 2e-4

    def test_sc_mn_4_2_2_8(self):
        assert abs(bp_threshold(sc_mn_base(4, 2, 2, 8)).epsilon_bp - 0.500252) <= 2e-4

    def test_sc_ha_2_4_2_4(self):
        assert abs(bp_threshold(sc_ha_base(2, 4, 2, 4)).epsilon_bp - 0.516970) <= 2e-4

    def test_bracket_within_tolerance(self):
        res = bp_threshold(regular_base(4, 8), tol_eps=1e-6)
        assert res.has_threshold and res.bracket_width <= 1e-6

    def test_no_threshold_reported(self):
        res = bp_threshold(mn_base(4, 2, 2))
        assert not res.has_threshold and res.epsilon_bp == 0.0

    def test_bisect_on_synthetic_predicate(self):
        res = bisect_threshold(lambda e: (e <= 0.3141, 1), 1e-9)
        assert abs(res.epsilon_bp - 0.3141) <= 1e-9

    def test_always_converging(self):
        assert bisect_threshold(lambda e: (True, 1), 1e-6).epsilon_bp == 1.0


def test_trace_csv():
    run = de_run(regular_base(3, 6), 0.3, trace=True)
    assert run.status == CONVERGED
    text = trace_csv(run.trace)
    lines = text.splitlines()
    assert lines[0] == "iter,max_msg"
    assert len(lines) == run.iterations + 1
    values = [float(ln.split(",")[1]) for ln in lines[1:]]
    assert all(b <= a for a, b in zip(values, values[1:]))
    assert values[-1] < 1e-10
