import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nnmcoop.analytic import expected_interference_singles
from nnmcoop.channel import (CooperationScheme, PathLossModel, channel_gain, mean_pair_signal,
                             pair_laplace, pair_signal, single_laplace)
from nnmcoop.errors import DomainError
from nnmcoop.geometry import BoundaryPolicy, Window
from nnmcoop.grouping import group
from nnmcoop.interference import (FadingSample, empirical_laplace, interference_profile,
                                  sample_interference, simulate_interference)
from nnmcoop.process import PointPattern, SeedSpec, sample_ppp

NC, OF1, PH = (CooperationScheme(k) for k in ("NC", "OF1", "PH"))
OF2H = CooperationScheme("OF2", 0.5)


def test_channel_gain_examples():
    assert channel_gain((0, 0), (1, 0), 1.0, 3.3) == 1.0
    assert channel_gain((0, 0), (0, 2), 2.0, 4.0) == 0.125
    with pytest.raises(DomainError):
        channel_gain((1, 1), (1, 1), 1.0, 4.0)
    g = channel_gain((0, 0), np.array([[1, 0], [2, 0], [3, 0]]), 1.0, 2.5)
    assert np.all(np.diff(g) < 0)


def test_pair_signal_examples():
    assert pair_signal(1, 1, 0.3, 0.3, PH, 0.0) == pytest.approx(4.0)
    assert pair_signal(1, 1, math.pi, 0.0, PH, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert pair_signal(3, 1, 0, 0, NC, 0.0) == 4
    assert pair_signal(3, 1, 0, 0, OF1, 0.0) == 3
    assert pair_signal(3, 1, 0, 0, CooperationScheme("OF2", 1.0), 0.99) == 3
    assert pair_signal(3, 1, 0, 0, CooperationScheme("OF2", 0.0), 0.0) == 1


def test_scheme_parsing():
    assert CooperationScheme.parse("of2(0.3)") == CooperationScheme("OF2", 0.3)
    assert str(CooperationScheme("OF2", 0.3)) == "OF2(0.3)"
    with pytest.raises(DomainError):
        CooperationScheme("XX")
    with pytest.raises(DomainError):
        CooperationScheme("OF2", 1.5)


@settings(max_examples=50)
@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_pair_signal_bounds(hx, hy, tx, ty):
    ph = pair_signal(hx, hy, tx, ty, PH, 0.0)
    assert 0 <= ph <= (math.sqrt(hx) + math.sqrt(hy)) ** 2 * (1 + 1e-12)
    assert pair_signal(hx, hy, tx, ty, OF1, 0.0) <= pair_signal(hx, hy, tx, ty, NC, 0.0)


def test_fading_closed_forms_against_mc():
    rng = np.random.default_rng(1)
    n = 400_000
    mx, my, s = 0.7, 0.2, 1.3
    hx, hy = rng.exponential(mx, n), rng.exponential(my, n)
    tx, ty = rng.uniform(0, 2 * math.pi, (2, n))
    coin = rng.random(n)
    for sch in (NC, OF1, PH, OF2H):
        g = pair_signal(hx, hy, tx, ty, sch, coin)
        assert g.mean() == pytest.approx(mean_pair_signal(mx, my, sch), abs=4 * g.std() / math.sqrt(n))
        e = np.exp(-s * g)
        assert e.mean() == pytest.approx(pair_laplace(mx, my, s, sch), abs=4 * e.std() / math.sqrt(n))
    e = np.exp(-s * hx)
    assert e.mean() == pytest.approx(single_laplace(mx, s), abs=4 * e.std() / math.sqrt(n))
    # without fading only the phases (and the OF2 coin) are random
    g = pair_signal(mx, my, tx, ty, PH, coin)
    assert np.exp(-s * g).mean() == pytest.approx(pair_laplace(mx, my, s, PH, fading=False), rel=5e-3)
    assert pair_laplace(mx, my, s, OF1, fading=False) == math.exp(-s * mx)
    assert mean_pair_signal(mx, my, OF1, fading=False) == mx


def test_empirical_laplace():
    assert empirical_laplace([1.0, 2.0], [0.0])[0].tolist() == [0.0, 1.0, 0.0]
    assert np.all(empirical_laplace(np.zeros(10), [0.1, 10])[:, 1] == 1)
    x = np.random.default_rng(3).exponential(1.0, 50_000)
    for s, v, se in empirical_laplace(x, [0.1, 1, 10]):
        assert abs(v - 1 / (1 + s)) < 3 * se
    with pytest.raises(DomainError):
        empirical_laplace([], [1.0])
    with pytest.raises(DomainError):
        empirical_laplace([1.0], [-1.0])


def test_sample_interference_empty_and_total():
    pat = PointPattern(np.empty((0, 2)), Window(10, 10), 0.0)
    smp = sample_interference(pat, group(pat), (5, 5), NC, PathLossModel(4, 1, 1), SeedSpec(1))
    assert (smp.i1, smp.i2, smp.total) == (0.0, 0.0, 0.0)
    pat = sample_ppp(0.5, Window(20, 20), SeedSpec(2))
    smp = sample_interference(pat, group(pat), (10, 10), NC, PathLossModel(4, 1, 1), SeedSpec(3))
    assert smp.total == smp.i1 + smp.i2 and smp.i1 >= 0 and smp.i2 >= 0
    with pytest.raises(DomainError):
        sample_interference(pat, group(pat), (30, 10), NC, PathLossModel(4, 1, 1), SeedSpec(3))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_pathwise_properties(seed):
    pat = sample_ppp(0.3, Window(30, 30), SeedSpec(seed))
    if len(pat) < 2:
        return
    g = group(pat)
    pl = PathLossModel(3.0, 1.0, 0.5)
    a = sample_interference(pat, g, (15, 15), NC, pl, SeedSpec(seed, 1))
    b = sample_interference(pat, g, (15, 15), OF1, pl, SeedSpec(seed, 1))
    assert b.i2 <= a.i2 and a.i1 == b.i1
    dist = np.hypot(*(pat.points - [15, 15]).T)
    fad = FadingSample.draw(SeedSpec(seed, 2).rng(), len(pat), len(g.pairs), 1.0)
    R = np.linspace(0, 10, 21)
    i1, i2 = interference_profile(dist, g, fad, 3.0, R, [NC, OF1, PH, OF2H])
    assert np.all(np.diff(i1) <= 1e-15)
    for v in i2.values():
        assert np.all(np.diff(v) <= 1e-15)


@pytest.fixture(scope="module")
def centre_study():
    # observer at the centre of the 100 x 100 window, 10^4 realizations
    return simulate_interference(0.1, Window(100, 100), PathLossModel(4.0, 1.0, 1.0), [1, 2, 3, 4, 5],
                                 [NC, OF1, PH, OF2H], 10_000, SeedSpec(21))


def test_singles_mean_matches_quadrature(centre_study):
    st_ = centre_study
    for j, R in enumerate(st_.R):
        q = expected_interference_singles(0.1, PathLossModel(4.0, 1.0, R))
        se = st_.i1_stderr[j]
        # at R = 1 the per-draw spread is ~2% of the mean at this sample size, so 3% is not a 3 sigma bound
        assert abs(st_.i1_mean[j] - q) < 3 * se
        if 3 * se < 0.03 * q:
            assert abs(st_.i1_mean[j] / q - 1) < 0.03


def test_scheme_mean_relations(centre_study):
    st_ = centre_study
    nc, ph, of2 = st_.i2_mean[NC], st_.i2_mean[PH], st_.i2_mean[OF2H]
    assert np.all(st_.i2_mean[OF1] <= nc)
    # PH and NC share fading draws, so their difference is the zero-mean cross term
    assert np.all(np.abs(ph - nc) < 2 * np.hypot(st_.i2_stderr[PH], st_.i2_stderr[NC]))
    assert np.all(np.abs(of2 - nc / 2) < 2 * np.hypot(st_.i2_stderr[OF2H], st_.i2_stderr[NC] / 2))


def test_fading_switch_keeps_means():
    kw = dict(lam=0.1, window=Window(60, 60), pl=PathLossModel(4.0, 1.0, 1.0), R_grid=[1.0],
              schemes=[NC], n_replications=400, seed=SeedSpec(5), policy=BoundaryPolicy.toroidal(),
              observers_per_rep=20)
    on = simulate_interference(**kw)
    off = simulate_interference(**kw, fading=False)
    assert abs(on.i1_mean[0] - off.i1_mean[0]) < 3 * math.hypot(on.i1_stderr[0], off.i1_stderr[0])


def test_threads_do_not_change_study():
    kw = dict(lam=0.1, window=Window(50, 50), pl=PathLossModel(3.0, 1.0, 1.0), R_grid=[1.0, 2.0],
              schemes=[NC, PH], n_replications=30, seed=SeedSpec(8), policy=BoundaryPolicy.toroidal(),
              observers_per_rep=5)
    a = simulate_interference(**kw)
    b = simulate_interference(**kw, threads=4)
    assert np.array_equal(a.i1_mean, b.i1_mean)
    assert np.array_equal(a.i2_mean[PH], b.i2_mean[PH])
