"""Closed forms and quadratures for the singles/pairs processes.

The pair integral over ``x, y`` in the plane is reduced by isotropy to the
radii ``r_x = |x|``, ``r_y = |y|`` and their angle ``psi``. The angular
integral of the pairing probability has the closed form::

    int_0^{2 pi} exp(-a |x - y|^2) dpsi
        = 2 pi exp(-a (r_x - r_y)^2) i0e(2 a r_x r_y),     a = lambda pi (2 - gamma)

so the expected pair interference is a two-dimensional radial integral
concentrated around the diagonal ``r_x = r_y``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import i0e

from .channel import CooperationScheme, PathLossModel, mean_pair_signal
from .errors import DivergenceError, DomainError, NumericalError
from .geometry import GAMMA


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for the adaptive (QUADPACK) radial quadratures.

    ``tail_cutoff`` is the radius beyond which the outer integral is handled
    separately (analytically for singles); ``None`` picks it automatically.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200
    tail_cutoff: float | None = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise DomainError("quadrature tolerances must be positive")


def p_star() -> float:
    """Probability that a typical atom is in a pair, ``1 / (2 - gamma)``."""
    return 1.0 / (2.0 - GAMMA)


def pair_probability(r, lam):
    """Probability that atoms at distance ``r`` are mutual nearest neighbours."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or not lam > 0:
        raise DomainError("need r >= 0 and lambda > 0")
    out = np.exp(-lam * math.pi * r * r * (2.0 - GAMMA))
    return float(out) if out.ndim == 0 else out


def nn_cdf_pairs(r, lam):
    """Nearest-neighbour distance cdf of the pairs process (Rayleigh law)."""
    return 1.0 - pair_probability(r, lam)


def rayleigh_scale_pairs(lam) -> float:
    return (2.0 * lam * math.pi * (2.0 - GAMMA)) ** -0.5


def nn_cdf_reference(r, lam_i):
    """Nearest-neighbour (and empty-space) cdf of a PPP of intensity ``lam_i``."""
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or lam_i < 0:
        raise DomainError("need r >= 0 and lambda >= 0")
    out = 1.0 - np.exp(-lam_i * math.pi * r * r)
    return float(out) if out.ndim == 0 else out


def intensity_density(lam, which: str) -> float:
    if not lam > 0:
        raise DomainError("lambda must be positive")
    if which == "singles":
        return (1.0 - p_star()) * lam
    if which == "pairs":
        return p_star() * lam
    raise DomainError(f"which must be 'singles' or 'pairs', got {which!r}")


def _quad(f, a, b, quad: QuadratureSpec, what: str):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err, info = integrate.quad(f, a, b, epsabs=quad.abs_tol, epsrel=quad.rel_tol,
                                        limit=quad.max_subdivisions, full_output=1)[:3]
    if not np.isfinite(val):
        raise NumericalError(f"{what}: non-finite integral on [{a}, {b}]")
    tol = max(quad.abs_tol, quad.rel_tol * abs(val))
    if err > 1e3 * tol:
        raise NumericalError(f"{what}: quadrature on [{a}, {b}] did not converge "
                             f"(value={val!r}, error estimate={err!r}, "
                             f"evaluations={info.get('neval')})")
    return val


def _check_finite(pl: PathLossModel):
    if pl.R <= 0:
        raise DivergenceError("the expected interference diverges for R = 0 with pure power-law path loss")


def expected_interference_singles_closed_form(lam, pl: PathLossModel, r_max=math.inf) -> float:
    """``(1 - p*) lambda 2 pi P (R^(2-beta) - r_max^(2-beta)) / (beta - 2)``."""
    _check_finite(pl)
    b = pl.beta
    outer = 0.0 if math.isinf(r_max) else r_max ** (2 - b)
    if r_max <= pl.R:
        return 0.0
    return (1 - p_star()) * lam * 2 * math.pi * pl.power * (pl.R ** (2 - b) - outer) / (b - 2)


def expected_interference_singles(lam, pl: PathLossModel, quad: QuadratureSpec = QuadratureSpec(),
                                  r_max: float = math.inf) -> float:
    """Mean interference from singles at the origin, atoms in ``R < r <= r_max``.

    Radial quadrature up to the tail cutoff, then the power-law tail in
    closed form. Fading enters only through its mean ``P``.
    """
    _check_finite(pl)
    if not lam >= 0:
        raise DomainError("lambda must be non-negative")
    if r_max <= pl.R:
        return 0.0
    b, P = pl.beta, pl.power
    T = quad.tail_cutoff if quad.tail_cutoff is not None else 100.0 * pl.R
    T = max(T, pl.R)
    hi = min(T, r_max)
    body = _quad(lambda r: 2 * math.pi * P * r ** (1 - b), pl.R, hi, quad, "singles radial integral")
    tail = 0.0
    if r_max > T:
        outer = 0.0 if math.isinf(r_max) else r_max ** (2 - b)
        tail = 2 * math.pi * P * (T ** (2 - b) - outer) / (b - 2)
    return (1 - p_star()) * lam * (body + tail)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _panel_nodes(lo, hi, peak, scale):
    """Composite Gauss-Legendre nodes on ``[lo, hi]``.

    Panels of width ``scale`` around ``peak`` resolve the Gaussian factor;
    geometric panels ``lo * 2^k`` resolve the power-law growth near ``lo``.
    """
    cuts = [lo, hi]
    k = np.arange(-12, 13)
    cuts.extend(peak + k * scale)
    if lo > 0:
        cuts.extend(lo * 2.0 ** np.arange(1, 12))
    cuts = np.unique(np.clip(cuts, lo, hi))
    a, b = cuts[:-1], cuts[1:]
    half = 0.5 * (b - a)
    nodes = (0.5 * (a + b))[:, None] + half[:, None] * _GL_X[None, :]
    weights = half[:, None] * _GL_W[None, :]
    return nodes.ravel(), weights.ravel()


def pair_radial_integral(eg, lam, r_lo_x, r_lo_y, r_hi=math.inf, quad: QuadratureSpec = QuadratureSpec(),
                         tail_cutoff=None) -> float:
    """``1/2 int int eg(|x|, |y|) exp(-a |x-y|^2) lambda^2 dx dy`` over the annuli.

    ``x`` ranges over ``r_lo_x < |x| <= r_hi`` and ``y`` over
    ``r_lo_y < |y| <= r_hi``; ``eg(rx, ry)`` must accept an array ``ry``.
    """
    a = lam * math.pi * (2.0 - GAMMA)
    width = math.sqrt(60.0 / a)
    pref = 0.5 * lam * lam * (2 * math.pi) ** 2

    def inner(rx):
        lo = max(r_lo_y, rx - width)
        hi = min(r_hi, rx + width)
        if hi <= lo:
            return 0.0
        ry, w = _panel_nodes(lo, hi, rx, 1.0 / math.sqrt(a))
        h = ry * eg(rx, ry) * np.exp(-a * (rx - ry) ** 2) * i0e(2 * a * rx * ry)
        return rx * float(np.dot(w, h))

    T = tail_cutoff if tail_cutoff is not None else r_lo_x + 20 * width
    T = min(max(T, r_lo_x), r_hi)
    out = _quad(inner, r_lo_x, T, quad, "pair radial integral")
    if r_hi > T:
        out += _quad(inner, T, r_hi, quad, "pair radial integral tail")
    return pref * out


def expected_interference_pairs(lam, pl: PathLossModel, scheme: CooperationScheme = CooperationScheme(),
                                quad: QuadratureSpec = QuadratureSpec(), r_max: float = math.inf,
                                fading: bool = True) -> float:
    """Mean interference from pairs at the origin; both members in ``R < r <= r_max``."""
    _check_finite(pl)
    if not lam > 0:
        return 0.0
    if r_max <= pl.R:
        return 0.0
    P, b = pl.power, pl.beta

    def eg(rx, ry):
        return mean_pair_signal(P * rx ** -b, P * np.asarray(ry) ** -b, scheme, fading)

    return pair_radial_integral(eg, lam, pl.R, pl.R, r_max, quad, quad.tail_cutoff)
