"""Laplace transform of the singles/pairs interference on a finite window.

Grouping is computed among the atoms of the window only. Conditioning on
the Poisson count ``N(A) = n`` gives::

    E[exp(-s I)] = sum_n P(N(A) = n) c_n(s),
    c_n(s) = E[exp(-s I) | n atoms i.i.d. uniform on A]

which is the series ``e^{-lambda S} sum_n lambda^n / n! T_n`` with
``T_n = S^n c_n``. Exact terms: ``c_0 = 1``; for singles ``c_1`` is a
polar quadrature and ``c_2 = 1`` (two atoms always pair up); for pairs
``c_1 = 1``. The remaining terms are Monte Carlo averages over uniform
placements, with fading, phases and coins integrated in closed form
(see :func:`nnmcoop.channel.pair_laplace`). The Poisson tail beyond
``n_max`` is lumped into the last term, so the truncation error is below
the tail mass and the transform is exactly 1 at ``s = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from .channel import CooperationScheme, PathLossModel, pair_laplace, single_laplace
from .errors import DomainError, TruncationError
from .geometry import Window
from .process import SeedSpec


@dataclass(frozen=True)
class LaplaceSeriesSpec:
    """Truncation and Monte Carlo settings.

    ``n_max=None`` selects the smallest ``n`` whose Poisson upper tail is
    below ``eps``; ``n_cap`` bounds that choice (the method is practical
    only for ``lambda S(A)`` up to about 15).
    """

    s_grid: tuple = (0.0, 0.01, 0.1, 1.0, 10.0, 100.0)
    n_max: int | None = None
    eps: float = 1e-6
    mc_samples_per_term: int = 20000
    seed: SeedSpec = field(default_factory=SeedSpec)
    n_cap: int = 40

    def __post_init__(self):
        if not 0 < self.eps < 1:
            raise DomainError("eps must lie in (0, 1)")
        if self.mc_samples_per_term < 1000:
            raise DomainError("need at least 1000 Monte Carlo samples per term")
        if any(s < 0 for s in self.s_grid):
            raise DomainError("s must be non-negative")


def _smallest_order(mu: float, eps: float) -> int:
    n = 0
    while stats.poisson.sf(n, mu) >= eps:
        n += 1
    return n


def truncation_order(mu: float, spec: LaplaceSeriesSpec) -> int:
    """Number of the last series term kept, checked against the tail bound."""
    if spec.n_max is not None:
        if stats.poisson.sf(spec.n_max, mu) >= spec.eps:
            need = _smallest_order(mu, spec.eps)
            raise TruncationError(f"n_max={spec.n_max} leaves Poisson tail >= {spec.eps}; "
                                  f"need n_max >= {need}", need)
        return spec.n_max
    n = _smallest_order(mu, spec.eps)
    if n > spec.n_cap:
        raise TruncationError(f"lambda*S(A)={mu:g} needs {n} terms (cap {spec.n_cap}); "
                              "use a smaller window", n)
    return n


def poisson_weights(mu: float, n_max: int) -> np.ndarray:
    """``P(N = n)`` for ``n < n_max`` and ``P(N >= n_max)`` last."""
    w = stats.poisson.pmf(np.arange(n_max + 1), mu)
    w[-1] = stats.poisson.sf(n_max - 1, mu) if n_max > 0 else 1.0
    return w


def _polar_window_integral(fun, window: Window, observer, r_min: float, what: str):
    """``int_{A, |x - o| > r_min} fun(|x - o|) dx`` in polar coordinates around ``o``."""
    ox, oy = observer
    x1, y1, x2, y2 = window.bounds
    corners = sorted(math.atan2(cy - oy, cx - ox) % (2 * math.pi)
                     for cx, cy in ((x1, y1), (x2, y1), (x2, y2), (x1, y2)))
    edges = [0.0, *corners, 2 * math.pi]

    def reach(th):
        c, s = math.cos(th), math.sin(th)
        ts = []
        if c > 0:
            ts.append((x2 - ox) / c)
        elif c < 0:
            ts.append((x1 - ox) / c)
        if s > 0:
            ts.append((y2 - oy) / s)
        elif s < 0:
            ts.append((y1 - oy) / s)
        return min(ts)

    def radial(th):
        hi = reach(th)
        if hi <= r_min:
            return 0.0
        return integrate.quad(lambda r: fun(r) * r, r_min, hi, epsabs=1e-13, epsrel=1e-11, limit=200)[0]

    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b > a:
            total += integrate.quad(radial, a, b, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
    return total


def _single_term_one(window, observer, pl, s, fading):
    """``c_1(s)`` for singles: one atom uniform on the window."""
    if s == 0:
        return 1.0

    def loss(r):
        return 1.0 - float(single_laplace(pl.power * r ** -pl.beta, s, fading))

    return 1.0 - _polar_window_integral(loss, window, observer, pl.R, "c1") / window.area


def _mnnr_batch(pts):
    """Nearest neighbour and pair mask for a batch ``(M, n, 2)`` of placements."""
    d = np.linalg.norm(pts[:, :, None, :] - pts[:, None, :, :], axis=-1)
    n = pts.shape[1]
    d[:, np.arange(n), np.arange(n)] = np.inf
    nn = d.argmin(axis=2)
    back = np.take_along_axis(nn, nn, axis=1)
    mutual = back == np.arange(n)[None, :]
    return nn, mutual


def _mc_term(n, s, which, window, observer, pl, scheme, fading, rng, M, chunk=20000):
    vals = []
    done = 0
    while done < M:
        m = min(chunk, M - done)
        u = rng.random((m, n, 2))
        pts = np.empty_like(u)
        pts[..., 0] = window.x0 + u[..., 0] * window.width
        pts[..., 1] = window.y0 + u[..., 1] * window.height
        nn, mutual = _mnnr_batch(pts)
        r = np.linalg.norm(pts - observer, axis=-1)
        mean_pow = np.asarray(pl.mean_gain(r))
        if which == "singles":
            lt = np.where(mutual, 1.0, single_laplace(mean_pow, s, fading))
            vals.append(np.prod(lt, axis=1))
        else:
            idx = np.arange(n)[None, :]
            lead = mutual & (idx < nn)
            mp = np.take_along_axis(mean_pow, nn, axis=1)
            both_out = (mean_pow > 0) & (mp > 0)
            lt = pair_laplace(mean_pow, mp, s, scheme, fading)
            lt = np.where(lead & both_out, lt, 1.0)
            vals.append(np.prod(lt, axis=1))
        done += m
    v = np.concatenate(vals)
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


@dataclass
class LaplaceSeries:
    """Series evaluation with diagnostics. ``rows`` holds ``(s, value, stderr)``."""

    rows: np.ndarray
    n_max: int
    tail_bound: float
    mu: float
    terms: np.ndarray  # c_n(s), shape (len(s_grid), n_max + 1)

    def __iter__(self):
        return iter(map(tuple, self.rows))

    def __len__(self):
        return len(self.rows)


def _series(which, lam, window, pl, scheme, spec, observer, fading):
    if not lam >= 0:
        raise DomainError("lambda must be non-negative")
    observer = window.center if observer is None else np.asarray(observer, dtype=float)
    if not window.contains(observer).all():
        raise DomainError("observer must lie inside the window")
    mu = lam * window.area
    n_max = truncation_order(mu, spec)
    w = poisson_weights(mu, n_max)
    terms = np.ones((len(spec.s_grid), n_max + 1))
    errs = np.zeros_like(terms)
    for j, s in enumerate(spec.s_grid):
        for n in range(1, n_max + 1):
            if s == 0:
                continue
            if which == "singles" and n == 1:
                terms[j, n] = _single_term_one(window, observer, pl, s, fading)
            elif (which == "singles" and n == 2) or (which == "pairs" and n == 1):
                continue
            else:
                rng = spec.seed.child(n, j).rng()
                terms[j, n], errs[j, n] = _mc_term(n, s, which, window, observer, pl, scheme,
                                                   fading, rng, spec.mc_samples_per_term)
    # 1 - sum w (1 - c) is exactly 1 at s = 0 whatever the rounding of the weights
    value = 1.0 - (1.0 - terms) @ w
    se = np.sqrt((errs ** 2) @ (w ** 2))
    rows = np.column_stack([np.asarray(spec.s_grid, dtype=float), value, se])
    return LaplaceSeries(rows, n_max, float(stats.poisson.sf(n_max, mu)), mu, terms)


def laplace_transform_singles(lam, window: Window, pl: PathLossModel, spec: LaplaceSeriesSpec,
                              observer=None, fading: bool = True) -> LaplaceSeries:
    """``E[exp(-s I1)]`` at ``observer`` (default: window centre)."""
    return _series("singles", lam, window, pl, None, spec, observer, fading)


def laplace_transform_pairs(lam, window: Window, pl: PathLossModel, scheme: CooperationScheme,
                            spec: LaplaceSeriesSpec, observer=None, fading: bool = True) -> LaplaceSeries:
    """``E[exp(-s I2)]`` at ``observer`` (default: window centre)."""
    return _series("pairs", lam, window, pl, scheme, spec, observer, fading)
