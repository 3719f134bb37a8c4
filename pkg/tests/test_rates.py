"""Tests for power budgets, the SINR rate kernels, and per-scheme wrappers."""
import numpy as np
import pytest
from numpy.testing import assert_allclose

from noma_das.channel import ChannelRealization, CsiMode
from noma_das.rates import (
    PowerBudget,
    SchemeKind,
    jt_composite_gains,
    jt_rate_components,
    log2_1p,
    noma_rate_components,
    rates_conventional_noma,
    rates_conventional_single_selection,
    rates_jt_noma,
    rates_noma_blanket,
    rates_noma_single,
    select_rru,
    single_selection_components,
)


def channel_from_gains(gain):
    """Realization with unit small-scale fading, so gain == L exactly."""
    return ChannelRealization(L=np.asarray(gain, dtype=float),
                              g=np.ones((7, 2), dtype=complex))


def worked_example_channel():
    """Center gains (1, 4), serving RRU gains (2, 0.1), other RRUs negligible."""
    L = np.full((7, 2), 1e-3)
    L[0] = [1.0, 4.0]
    L[1] = [2.0, 0.1]
    return channel_from_gains(L)


def test_log2_1p_accuracy():
    assert log2_1p(0.0) == 0.0
    assert_allclose(log2_1p(1.0), 1.0, rtol=1e-15)
    # log1p keeps 1e-12-scale SINRs exact where log2(1 + x) would lose digits
    assert_allclose(log2_1p(1e-12), 1e-12 / np.log(2.0), rtol=1e-9)


def test_power_budget_splits():
    b = PowerBudget.das_split(10.0)
    assert_allclose((b.p_cen, b.p_rru), (5.0, 5.0 / 6.0), rtol=1e-15)
    c = PowerBudget.centralized(10.0)
    assert (c.p_cen, c.p_rru) == (10.0, 0.0)
    e = PowerBudget.equal_split(7.0)
    assert_allclose((e.p_cen, e.p_rru), (1.0, 1.0), rtol=1e-15)
    assert_allclose(b.with_p1(2.0).p2, 3.0, rtol=1e-15)
    assert b.with_beta(0.25).beta == 0.25


def test_power_budget_validation():
    with pytest.raises(ValueError):
        PowerBudget(p_total=1.0, p_cen=0.9, p_rru=0.1)  # parts do not add up
    with pytest.raises(ValueError):
        PowerBudget.das_split(1.0, center_fraction=1.2)
    with pytest.raises(ValueError):
        PowerBudget.das_split(1.0).with_p1(0.9)  # exceeds p_cen = 0.5
    with pytest.raises(ValueError):
        PowerBudget.das_split(1.0).with_beta(1.5)
    with pytest.raises(ValueError):
        PowerBudget.das_split(1.0).p2  # p1 not allocated yet


def test_select_rru_modes_and_ties():
    L = np.ones((7, 2))
    L[3, 0] = 9.0
    g = np.ones((7, 2), dtype=complex)
    g[5, 0] = 4.0  # instantaneous spike at RRU 5 for user 1
    ch = ChannelRealization(L=L, g=g)
    assert select_rru(ch, 1, CsiMode.CDI_ONLY) == 3
    assert select_rru(ch, 1, CsiMode.INSTANTANEOUS_CGI) == 5  # 16 > 9
    flat = channel_from_gains(np.ones((7, 2)))
    assert select_rru(flat, 1, CsiMode.INSTANTANEOUS_CGI) == 1  # tie, lowest index
    assert select_rru(flat, 2, CsiMode.CDI_ONLY) == 1


def test_noma_single_selection_worked_example():
    """P_cen = 0.5, P_rru = 1/12, P_1 = 0.3 on the worked gain set."""
    ch = worked_example_channel()
    budget = PowerBudget.das_split(1.0).with_p1(0.3)
    out = rates_noma_single(ch, budget, weak=1, strong=2, q=1)
    assert_allclose(out.z1, np.log2(25.0 / 18.0), rtol=1e-14)
    assert_allclose(out.r2, np.log2(1.8), rtol=1e-14)
    assert out.r1 == min(out.z1, out.z2)
    assert not out.outage


def test_noma_components_identities():
    rng = np.random.default_rng(12)
    g0w = rng.exponential(size=500)
    g0s = g0w + rng.exponential(size=500)  # strong user really stronger
    rru_w = rng.exponential(size=500)
    rru_s = rng.exponential(size=500)
    p_cen = 5.0
    z1a, z2a, r2a = noma_rate_components(g0w, g0s, rru_w, rru_s, 1.0, p_cen)
    z1b, z2b, r2b = noma_rate_components(g0w, g0s, rru_w, rru_s, 3.5, p_cen)
    # the strong user's SIC stage and own rate trade off exactly
    assert_allclose(z2a + r2a, z2b + r2b, rtol=1e-12)
    assert np.all(z1b > z1a)   # more weak-message power helps the weak user
    assert np.all(r2b < r2a)   # and costs the strong user
    # the RRU boost enters z1 and z2 asymmetrically, so the SIC stage z2 can
    # bind below z1 here; both stay positive rates regardless
    assert np.all(z2a > 0.0) and np.all(z1a > 0.0)


def test_blanket_dominates_single_selection():
    rng = np.random.default_rng(13)
    budget = PowerBudget.das_split(4.0).with_p1(1.0)
    for _ in range(50):
        L = rng.exponential(size=(7, 2)) + 1e-3
        L[0] = [1.0, 2.0]
        ch = channel_from_gains(L)
        q = select_rru(ch, 1, CsiMode.INSTANTANEOUS_CGI)
        single = rates_noma_single(ch, budget, weak=1, strong=2, q=q)
        blanket = rates_noma_blanket(ch, budget, weak=1, strong=2)
        assert blanket.r1 >= single.r1 - 1e-15
        assert_allclose(blanket.r2, single.r2, rtol=1e-14)  # same center split


def test_conventional_noma_rates():
    ch = worked_example_channel()
    out = rates_conventional_noma(ch, (0.6, 0.4), weak=1, strong=2)
    assert_allclose(out.z1, log2_1p(0.6 / (0.4 + 1.0)), rtol=1e-14)
    assert_allclose(out.r2, log2_1p(4.0 * 0.4), rtol=1e-14)
    assert out.r1 == out.z1
    assert out.z2 >= out.z1  # CGI ordering makes SIC safe
    with pytest.raises(ValueError):
        rates_conventional_noma(ch, (-0.1, 0.5), weak=1, strong=2)


def test_conventional_single_selection_fixed_roles():
    """User labels, not channel ordering, decide who listens to the center."""
    L = np.full((7, 2), 1e-3)
    L[0] = [3.0, 0.5]  # user 1 has the better center link this draw
    L[2] = [4.0, 0.2]
    ch = channel_from_gains(L)
    budget = PowerBudget.das_split(2.0)
    out = rates_conventional_single_selection(ch, budget)
    r1, r2 = single_selection_components(3.0, 0.5, 4.0, 0.2,
                                         budget.p_cen, budget.p_rru)
    assert_allclose(out.r1, r1, rtol=1e-14)
    assert_allclose(out.r2, r2, rtol=1e-14)
    # user 2 still decodes from the center even though its link is weaker
    assert_allclose(out.r2, log2_1p(0.5 * 1.0 / (0.2 * budget.p_rru + 1.0)),
                    rtol=1e-14)


def test_jt_composite_gains_manual():
    L = np.arange(14, dtype=float).reshape(7, 2) + 1.0
    ch = channel_from_gains(L)
    budget = PowerBudget.das_split(2.0)
    h = jt_composite_gains(ch, budget)
    q = np.array([budget.p_cen] + [budget.p_rru] * 6)
    assert_allclose(h, q @ L, rtol=1e-14)


def test_jt_rate_components_edges():
    h_w, h_s = 2.0, 5.0
    z1, z2, r2 = jt_rate_components(h_w, h_s, 1.0)  # everything to the weak user
    assert r2 == 0.0
    assert_allclose(z1, log2_1p(2.0), rtol=1e-14)
    z1, z2, r2 = jt_rate_components(h_w, h_s, 0.0)
    assert z1 == 0.0 and z2 == 0.0
    assert_allclose(r2, log2_1p(5.0), rtol=1e-14)
    # with a common power ratio the stronger composite decodes no slower
    z1, z2, _ = jt_rate_components(h_w, h_s, 0.4)
    assert z2 >= z1


def test_rates_jt_noma_wrapper():
    L = np.ones((7, 2))
    L[:, 1] = 2.0
    ch = channel_from_gains(L)
    budget = PowerBudget.das_split(3.0)
    out = rates_jt_noma(ch, budget, beta=0.7)
    h = jt_composite_gains(ch, budget)
    z1, z2, r2 = jt_rate_components(min(h), max(h), 0.7)
    assert_allclose((out.z1, out.z2, out.r2), (z1, z2, r2), rtol=1e-14)
    assert out.r1 == min(out.z1, out.z2)
    with pytest.raises(ValueError):
        rates_jt_noma(ch, budget, beta=1.4)
    with pytest.raises(ValueError):
        rates_jt_noma(ch, budget)  # no beta anywhere
    out2 = rates_jt_noma(ch, budget.with_beta(0.7))
    assert_allclose(out2.r1, out.r1, rtol=1e-15)


def test_scheme_tokens_frozen():
    assert SchemeKind.NOMA_SINGLE_SELECTION.value == "noma_single_selection"
    assert SchemeKind.NOMA_BLANKET.value == "noma_blanket"
    assert SchemeKind.CONVENTIONAL_NOMA.value == "conventional_noma"
    assert SchemeKind.CONVENTIONAL_SINGLE_SELECTION.value == "conventional_single_selection"
    assert SchemeKind.JT_NOMA.value == "jt_noma"


def test_noise_scaling_consistency():
    # doubling noise and halving all received powers leaves the rates alone
    args = (1.3, 2.6, 0.8, 0.4, 1.5, 4.0)
    a = noma_rate_components(*args, sigma2=1.0)
    b = noma_rate_components(2.6, 5.2, 1.6, 0.8, 1.5, 4.0, sigma2=2.0)
    assert_allclose(a, b, rtol=1e-14)
