import numpy as np
import pytest
from scipy import stats

from nnmcoop.errors import DomainError
from nnmcoop.geometry import Window
from nnmcoop.process import PointPattern, SeedSpec, independent_thin, sample_ppp


def test_empty_and_negative():
    assert len(sample_ppp(0.0, Window(10, 10), SeedSpec(1))) == 0
    with pytest.raises(DomainError):
        sample_ppp(-0.1, Window(10, 10), SeedSpec(1))


def test_determinism_and_stream_independence():
    a = sample_ppp(0.1, Window(100, 100), SeedSpec(7, 3))
    b = sample_ppp(0.1, Window(100, 100), SeedSpec(7, 3))
    c = sample_ppp(0.1, Window(100, 100), SeedSpec(7, 4))
    assert np.array_equal(a.points, b.points)
    assert not (len(a) == len(c) and np.array_equal(a.points, c.points))
    assert SeedSpec(7, 3).child(1).rng().random() != SeedSpec(7, 3).child(2).rng().random()


def test_seed_validation():
    with pytest.raises(DomainError):
        SeedSpec(-1)
    with pytest.raises(DomainError):
        SeedSpec(0, -2)


def test_counts_are_poisson():
    # mean over 10^4 replications of a 100 x 100 window at lambda = 0.1
    counts = np.array([len(sample_ppp(0.1, Window(100, 100), SeedSpec(11, k)))
                       for k in range(10_000)])
    se = np.sqrt(1000 / len(counts))
    assert abs(counts.mean() - 1000) < 3 * se
    # chi-square goodness of fit on binned counts
    edges = np.concatenate([[-0.5], np.arange(940, 1061, 10) - 0.5, [np.inf]])
    obs = np.histogram(counts, bins=edges)[0]
    cdf = stats.poisson.cdf(edges[1:] - 0.5, 1000)
    exp = np.diff(np.concatenate([[0], cdf])) * len(counts)
    exp[-1] = len(counts) - exp[:-1].sum()
    assert stats.chisquare(obs, exp).pvalue > 0.01


def test_spatial_uniformity():
    pts = np.concatenate([sample_ppp(1.0, Window(10, 10), SeedSpec(2, k)).points for k in range(200)])
    cells = np.floor(pts / 2.5).astype(int)
    obs = np.bincount(cells[:, 0] * 4 + cells[:, 1], minlength=16)
    assert stats.chisquare(obs).pvalue > 0.01


def test_thinning():
    base = sample_ppp(1.0, Window(10, 10), SeedSpec(5))
    assert np.array_equal(independent_thin(base, 1.0, SeedSpec(6)).points, base.points)
    assert len(independent_thin(base, 0.0, SeedSpec(6))) == 0
    with pytest.raises(DomainError):
        independent_thin(base, 1.5, SeedSpec(6))
    p = 1 / (2 - (2 / 3 - np.sqrt(3) / (2 * np.pi)))
    big = sample_ppp(1.0, Window(1100, 1000), SeedSpec(8))
    assert len(big) > 1_000_000
    thin = independent_thin(big, p, SeedSpec(9))
    assert abs(len(thin) / len(big) - 0.6215) < 0.005
    assert thin.density == pytest.approx(p)
    assert set(thin.indices) <= set(range(len(big)))


def test_csv_roundtrip(tmp_path):
    pat = sample_ppp(0.5, Window(8, 6, 1.0, -2.0), SeedSpec(3, 1, (4,)))
    pat.to_csv(tmp_path / "p.csv", header_lines=["hello"])
    back = PointPattern.from_csv(tmp_path / "p.csv")
    assert np.array_equal(back.points, pat.points)
    assert back.window == pat.window
    assert back.density == pat.density
    assert back.seed == pat.seed
    assert (tmp_path / "p.csv").read_text().splitlines()[1] == "index,x,y"


def test_points_must_be_inside():
    with pytest.raises(DomainError):
        PointPattern([[11.0, 0.0]], Window(10, 10), 1.0)
