"""Sampling of the interference created by singles and by pairs."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .channel import CooperationScheme, PathLossModel, channel_gain, pair_signal  # noqa: F401
from .errors import DomainError
from .geometry import BoundaryPolicy, Window, displacement
from .grouping import GroupingResult, group
from .process import PointPattern, SeedSpec, sample_ppp, uniform_points


@dataclass(frozen=True)
class InterferenceSample:
    i1: float
    i2: float

    @property
    def total(self) -> float:
        return self.i1 + self.i2


@dataclass(frozen=True)
class FadingSample:
    """Per-atom fading powers and phases plus one OF2 coin per pair."""

    nu: np.ndarray
    theta: np.ndarray
    coin: np.ndarray

    @classmethod
    def draw(cls, rng: np.random.Generator, n_atoms: int, n_pairs: int, power: float,
             fading: bool = True) -> "FadingSample":
        # fixed draw order so that every scheme sees the same randomness
        nu = rng.exponential(power, n_atoms) if fading else np.full(n_atoms, float(power))
        theta = rng.uniform(0.0, 2 * math.pi, n_atoms)
        coin = rng.random(n_pairs)
        return cls(nu, theta, coin)


def _observer_distances(points, observer, window, policy):
    d = displacement(observer, points, window, policy)
    return np.hypot(d[:, 0], d[:, 1])


def interference_profile(dist, grouping: GroupingResult, fad: FadingSample, beta: float,
                         R_values, schemes, r_max: float = math.inf):
    """Interference for several exclusion radii and schemes on one draw.

    Returns ``(i1, {scheme: i2})`` with one entry per value of ``R_values``.
    Atoms farther than ``r_max`` are ignored; a pair counts only when both
    members lie in ``R < r <= r_max``.

    ``dist`` may also be a ``(k, n)`` block of distances from ``k`` observers,
    with matching ``(k, n)`` fading arrays and ``(k, m)`` coins; the result
    is then summed over the observers.
    """
    R_values = np.atleast_1d(np.asarray(R_values, dtype=float))
    dist = np.asarray(dist, dtype=float)
    if np.any(dist == 0):
        raise DomainError("observer coincides with an atom")
    with np.errstate(divide="ignore"):
        h = fad.nu * dist ** -float(beta)
    inside = dist <= r_max
    s = grouping.singles
    ds = dist[..., s].ravel()
    hs = np.where(inside[..., s], h[..., s], 0.0).ravel()
    i1 = (ds[None, :] > R_values[:, None]) @ hs
    a, b = grouping.pairs[:, 0], grouping.pairs[:, 1]
    dmin = np.minimum(dist[..., a], dist[..., b]).ravel()
    ok = inside[..., a] & inside[..., b]
    keep = dmin[None, :] > R_values[:, None]
    i2 = {}
    for sch in schemes:
        g = pair_signal(h[..., a], h[..., b], fad.theta[..., a], fad.theta[..., b], sch, fad.coin)
        g = np.where(ok, g, 0.0).ravel()
        i2[sch] = keep @ g
    return i1, i2


def sample_interference(pattern: PointPattern, grouping: GroupingResult, observer,
                        scheme: CooperationScheme, pl: PathLossModel, seed: SeedSpec,
                        policy: BoundaryPolicy = BoundaryPolicy(), fading: bool = True,
                        r_max: float = math.inf) -> InterferenceSample:
    """One draw of ``(I1, I2)`` at ``observer`` with fresh fading from ``seed``.

    Reusing ``seed`` with another scheme reproduces the same fading, so
    schemes can be compared pathwise.
    """
    observer = np.asarray(observer, dtype=float)
    if not pattern.window.contains(observer).all():
        raise DomainError("observer must lie inside the window")
    if len(pattern) == 0:
        return InterferenceSample(0.0, 0.0)
    fad = FadingSample.draw(seed.rng(), len(pattern), len(grouping.pairs), pl.power, fading)
    dist = _observer_distances(pattern.points, observer, pattern.window, policy)
    i1, i2 = interference_profile(dist, grouping, fad, pl.beta, [pl.R], [scheme], r_max)
    return InterferenceSample(float(i1[0]), float(i2[scheme][0]))


def empirical_laplace(samples, s_grid):
    """Rows ``(s, mean exp(-s X), standard error)``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise DomainError("need at least one sample")
    rows = []
    for s in np.atleast_1d(s_grid):
        if s < 0:
            raise DomainError("s must be non-negative")
        e = np.exp(-s * x)
        se = e.std(ddof=1) / math.sqrt(x.size) if x.size > 1 else 0.0
        rows.append((float(s), float(e.mean()), float(se)))
    return np.array(rows)


@dataclass
class InterferenceStudy:
    """Monte Carlo means of ``I1`` and ``I2`` over an exclusion-radius grid.

    Standard errors come from replication-level batches (observers inside one
    realization are averaged first since they share the atoms).
    """

    R: np.ndarray
    i1_mean: np.ndarray
    i1_stderr: np.ndarray
    i2_mean: dict = field(default_factory=dict)
    i2_stderr: dict = field(default_factory=dict)
    n_replications: int = 0
    n_observers: int = 0


def _batch_stats(per_rep):
    per_rep = np.asarray(per_rep)
    n = per_rep.shape[0]
    mean = per_rep.mean(axis=0)
    se = per_rep.std(axis=0, ddof=1) / math.sqrt(n) if n > 1 else np.zeros_like(mean)
    return mean, se


def simulate_interference(lam: float, window: Window, pl: PathLossModel, R_grid, schemes,
                          n_replications: int, seed: SeedSpec,
                          policy: BoundaryPolicy = BoundaryPolicy(), observers_per_rep: int = 1,
                          r_max: float = math.inf, fading: bool = True, threads: int = 1) -> InterferenceStudy:
    """Interference statistics over independent PPP realizations.

    Under a guard-margin policy with one observer, the observer is the window
    centre; otherwise observers are uniform over the window (toroidal) or the
    eroded interior (guard margin). The grouping always uses every atom of
    the window. Replication ``k`` uses stream ``k`` of ``seed.master_seed``.
    """
    R_grid = np.atleast_1d(np.asarray(R_grid, dtype=float))
    schemes = list(schemes)
    interior = policy.interior(window, lam)

    def one(k):
        sd = SeedSpec(seed.master_seed, k)
        pat = sample_ppp(lam, window, sd)
        g = group(pat, policy)
        rng = sd.rng(1)
        if observers_per_rep == 1 and not policy.is_toroidal:
            obs = window.center[None, :]
        else:
            obs = uniform_points(rng, observers_per_rep, interior)
        m = len(obs)
        if len(pat) == 0:
            return np.zeros(len(R_grid)), np.zeros((len(schemes), len(R_grid)))
        # one fading block for all observers of this realization
        n, npairs = len(pat), len(g.pairs)
        nu = rng.exponential(pl.power, (m, n)) if fading else np.full((m, n), float(pl.power))
        fad = FadingSample(nu, rng.uniform(0.0, 2 * math.pi, (m, n)), rng.random((m, npairs)))
        d = displacement(obs[:, None, :], pat.points[None, :, :], window, policy)
        dist = np.hypot(d[..., 0], d[..., 1])
        i1, i2 = interference_profile(dist, g, fad, pl.beta, R_grid, schemes, r_max)
        return i1 / m, np.array([i2[s] / m for s in schemes])

    reps = range(n_replications)
    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            results = list(ex.map(one, reps))
    else:
        results = [one(k) for k in reps]
    i1m, i1s = _batch_stats([r[0] for r in results])
    i2m, i2s = _batch_stats([r[1] for r in results])
    return InterferenceStudy(R_grid, i1m, i1s,
                             {s: i2m[j] for j, s in enumerate(schemes)},
                             {s: i2s[j] for j, s in enumerate(schemes)},
                             n_replications, observers_per_rep)


def simulate_window_interference(lam: float, window: Window, pl: PathLossModel,
                                 scheme: CooperationScheme, n_samples: int, seed: SeedSpec,
                                 observer=None, fading: bool = True):
    """Direct samples of ``(I1, I2)`` where grouping sees only the window's atoms.

    Used as the simulation counterpart of the finite-window Laplace series.
    Returns two arrays of length ``n_samples``.
    """
    observer = window.center if observer is None else np.asarray(observer, dtype=float)
    policy = BoundaryPolicy("guard-margin", 0.0)
    i1 = np.zeros(n_samples)
    i2 = np.zeros(n_samples)
    for k in range(n_samples):
        sd = SeedSpec(seed.master_seed, k)
        pat = sample_ppp(lam, window, sd)
        if len(pat) == 0:
            continue
        g = group(pat, policy)
        fad = FadingSample.draw(sd.rng(1), len(pat), len(g.pairs), pl.power, fading)
        dist = _observer_distances(pat.points, observer, window, policy)
        a, b = interference_profile(dist, g, fad, pl.beta, [pl.R], [scheme])
        i1[k], i2[k] = a[0], b[scheme][0]
    return i1, i2
