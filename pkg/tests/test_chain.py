import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import chain_update
from scmn._kernels import CONVERGED
from scmn.chain import ChainProfile, chain_run, chain_sweep, chain_threshold, fixed_point_residual

degrees = st.tuples(st.integers(1, 3), st.integers(2, 5), st.integers(1, 4)).map(lambda t: (t[0] * t[1], t[1], t[2]))


@st.composite
def profiles(draw, max_L=5, max_w=4):
    L = draw(st.integers(1, max_L))
    w = draw(st.integers(1, max_w))
    n = 2 * L + 1
    x = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    y = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    eps = draw(st.floats(0, 1))
    return ChainProfile(L, w, np.array(x), np.array(y), eps)


@given(p=profiles(), lrg=degrees)
def test_sweep_matches_literal_formula(p, lrg):
    l, r, g = lrg
    q = chain_sweep(p, l, r, g)
    nx, ny = chain_update(p.x, p.y, p.eps, l, r, g, p.w, p.L)
    np.testing.assert_allclose(q.x, nx, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(q.y, ny, rtol=1e-12, atol=1e-15)


@given(p=profiles(), lrg=degrees)
def test_sweep_commutes_with_reflection(p, lrg):
    l, r, g = lrg
    a = chain_sweep(p.reflected(), l, r, g)
    b = chain_sweep(p, l, r, g).reflected()
    np.testing.assert_allclose(a.x, b.x, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(a.y, b.y, rtol=1e-12, atol=1e-15)


@given(L=st.integers(1, 10), eps=st.floats(0, 1), lrg=degrees)
def test_w1_all_ones_is_uncoupled(L, eps, lrg):
    l, r, g = lrg
    q = chain_sweep(ChainProfile(L, 1, eps=eps), l, r, g)
    assert (q.x == 1.0).all()
    np.testing.assert_allclose(q.y, eps, rtol=1e-15)


@given(L=st.integers(1, 8), w=st.integers(1, 4), eps=st.floats(0, 1))
def test_zero_profile_is_fixed(L, w, eps):
    p = ChainProfile.zeros(L, w, eps)
    q = chain_sweep(p, 4, 2, 2)
    assert not q.x.any() and not q.y.any()
    assert fixed_point_residual(p, 4, 2, 2) == 0.0


def test_residual_w1_all_ones_at_eps_one():
    assert fixed_point_residual(ChainProfile(6, 1, eps=1.0), 4, 2, 2) == 0.0


def test_profile_validation():
    with pytest.raises(ValueError):
        ChainProfile(2, 1, np.ones(4), np.ones(5))


def test_profile_csv():
    text = ChainProfile(1, 2, eps=0.5).to_csv()
    assert text.splitlines() == ["section,x,y", "-1,1.0,1.0", "0,1.0,1.0", "1,1.0,1.0"]


class TestForwardDE:
    def test_converged_residual(self):
        run = chain_run(4, 2, 2, 8, 2, 0.45)
        assert run.status == CONVERGED
        p = run.profile.copy()
        assert fixed_point_residual(p, 4, 2, 2) <= 10 * 1e-10

    @pytest.mark.parametrize("w", [2, 3])
    def test_eps_zero_converges(self, w):
        assert chain_run(4, 2, 2, 6, w, 0.0).converged

    def test_monotone_and_symmetric_every_sweep(self):
        p = ChainProfile(12, 3, eps=0.52)
        for _ in range(400):
            q = chain_sweep(p, 4, 2, 2)
            assert (q.x <= p.x + 1e-15).all() and (q.y <= p.y + 1e-15).all()
            np.testing.assert_allclose(q.x, q.x[::-1], rtol=1e-13, atol=1e-15)
            np.testing.assert_allclose(q.y, q.y[::-1], rtol=1e-13, atol=1e-15)
            p = q

    def test_w1_interior_is_uncoupled_fixed_point(self):
        L, eps = 30, 0.7
        run = chain_run(4, 2, 2, L, 1, eps)
        assert not run.converged
        interior = np.abs(run.profile.sections) <= L - 10
        np.testing.assert_allclose(run.profile.x[interior], 1.0, atol=1e-6)
        np.testing.assert_allclose(run.profile.y[interior], eps, atol=1e-6)

    def test_decoding_wave_keeps_center_largest(self):
        L, eps = 16, 0.48
        p = ChainProfile(L, 2, eps=eps)
        front = []
        for _ in range(3000):
            p = chain_sweep(p, 4, 2, 2)
            assert p.x[L] == p.x.max()
            below = np.nonzero(p.x < 0.5)[0]
            front.append(below.size)
            if p.max() < 1e-10:
                break
        # the set of sections below 0.5 only grows: the front moves inward
        assert all(b >= a for a, b in zip(front, front[1:]))
        assert front[-1] == 2 * L + 1


class TestThreshold:
    def test_w2_just_below_half(self):
        res = chain_threshold(4, 2, 2, 32, 2)
        assert 0.49 <= res.epsilon_bp < 0.50

    def test_non_decreasing_in_w(self):
        tol = 1e-6
        ths = [chain_threshold(4, 2, 2, 16, w, tol_eps=tol).epsilon_bp for w in (2, 3, 4, 5)]
        assert all(b >= a - tol for a, b in zip(ths, ths[1:]))

    def test_w1_has_no_threshold(self):
        res = chain_threshold(4, 2, 2, 4, 1)
        assert not res.has_threshold
