"""Path loss, cooperation schemes, and fading-averaged signal functionals.

Fading is Rayleigh: the complex amplitude of a link is ``sqrt(nu) e^{i theta}``
with ``nu ~ Exp(mean P)`` and ``theta ~ U[0, 2 pi)``. With fading switched off
``nu`` is the constant ``P`` (phases stay random).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import i0e

from .errors import DomainError

SCHEMES = ("NC", "OF1", "OF2", "PH")


@dataclass(frozen=True)
class PathLossModel:
    beta: float = 4.0
    power: float = 1.0
    R: float = 0.0

    def __post_init__(self):
        if not self.beta > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.beta}")
        if not self.power > 0:
            raise DomainError("transmit power must be positive")
        if self.R < 0:
            raise DomainError("exclusion radius must be non-negative")

    def with_R(self, R: float) -> "PathLossModel":
        return PathLossModel(self.beta, self.power, R)

    def mean_gain(self, r):
        """``P r^-beta`` outside the exclusion ball, 0 inside."""
        r = np.asarray(r, dtype=float)
        with np.errstate(divide="ignore"):
            out = np.where(r > self.R, self.power * r ** -self.beta, 0.0)
        return out


@dataclass(frozen=True)
class CooperationScheme:
    """How a pair transmits: ``NC``, ``OF1``, ``OF2`` (with ``q``) or ``PH``."""

    kind: str = "NC"
    q: float = 0.5

    def __post_init__(self):
        if self.kind not in SCHEMES:
            raise DomainError(f"unknown scheme {self.kind!r}; expected one of {SCHEMES}")
        if not 0.0 <= self.q <= 1.0:
            raise DomainError("q must lie in [0, 1]")

    @classmethod
    def parse(cls, text: str) -> "CooperationScheme":
        """Parse ``"NC"``, ``"OF1"``, ``"PH"``, ``"OF2"`` or ``"OF2(0.3)"``."""
        text = text.strip().upper()
        if text.startswith("OF2(") and text.endswith(")"):
            return cls("OF2", float(text[4:-1]))
        return cls(text)

    def __str__(self):
        return f"OF2({self.q!r})" if self.kind == "OF2" else self.kind


def channel_gain(observer, bs, nu, beta):
    """``nu * |observer - bs|^-beta``."""
    d = np.hypot(*(np.asarray(observer, dtype=float) - np.asarray(bs, dtype=float)).T)
    if np.any(d == 0):
        raise DomainError("observer coincides with a base station")
    out = nu * d ** -float(beta)
    return float(out) if np.ndim(out) == 0 else out


def pair_signal(hx, hy, theta_x, theta_y, scheme: CooperationScheme, coin):
    """Power received from one pair with link powers ``hx`` and ``hy``.

    ``coin`` is a uniform draw on ``[0, 1)``; under OF2 the ``x`` member is
    the active one when ``coin < q``.
    """
    hx = np.asarray(hx, dtype=float)
    hy = np.asarray(hy, dtype=float)
    k = scheme.kind
    if k == "NC":
        out = hx + hy
    elif k == "OF1":
        out = np.maximum(hx, hy)
    elif k == "OF2":
        out = np.where(np.asarray(coin) < scheme.q, hx, hy)
    else:
        out = hx + hy + 2.0 * np.sqrt(hx * hy) * np.cos(np.asarray(theta_x) - np.asarray(theta_y))
        out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out


def mean_pair_signal(mx, my, scheme: CooperationScheme, fading: bool = True):
    """``E[g]`` for a pair whose links have mean powers ``mx`` and ``my``.

    With exponential fading the maximum has mean ``mx + my - mx my/(mx + my)``
    (inclusion-exclusion on the survival functions).
    """
    mx = np.asarray(mx, dtype=float)
    my = np.asarray(my, dtype=float)
    k = scheme.kind
    if k in ("NC", "PH"):
        return mx + my
    if k == "OF2":
        return scheme.q * mx + (1.0 - scheme.q) * my
    if not fading:
        return np.maximum(mx, my)
    tot = mx + my
    with np.errstate(invalid="ignore", divide="ignore"):
        harm = np.where(tot > 0, mx * my / np.where(tot > 0, tot, 1.0), 0.0)
    return tot - harm


def single_laplace(m, s, fading: bool = True):
    """``E[exp(-s nu c)]`` for a link of mean power ``m = P c``."""
    m = np.asarray(m, dtype=float)
    if fading:
        return 1.0 / (1.0 + s * m)
    return np.exp(-s * m)


def pair_laplace(mx, my, s, scheme: CooperationScheme, fading: bool = True):
    """``E[exp(-s g)]`` for one pair, averaged over fading, phases and coin.

    Closed forms: with Rayleigh fading the in-phase sum of two independent
    circular Gaussian amplitudes is again circular Gaussian, so PH is
    exponential with mean ``mx + my``; OF1 follows from the survival function
    of the maximum of two exponentials. Without fading PH averages the phase
    difference, giving ``exp(-s(mx + my)) I0(2 s sqrt(mx my))``.
    """
    mx = np.asarray(mx, dtype=float)
    my = np.asarray(my, dtype=float)
    k = scheme.kind
    if k == "OF2":
        return scheme.q * single_laplace(mx, s, fading) + (1 - scheme.q) * single_laplace(my, s, fading)
    if not fading:
        if k == "NC":
            return np.exp(-s * (mx + my))
        if k == "OF1":
            return np.exp(-s * np.maximum(mx, my))
        root = np.sqrt(mx * my)
        return np.exp(-s * (np.sqrt(mx) - np.sqrt(my)) ** 2) * i0e(2 * s * root)
    if k == "NC":
        return 1.0 / ((1.0 + s * mx) * (1.0 + s * my))
    if k == "PH":
        return 1.0 / (1.0 + s * (mx + my))
    # OF1: E e^{-s max} = 1 - s [1/(s+a) + 1/(s+b) - 1/(s+a+b)], a = 1/mx, b = 1/my
    # written as a product form that stays finite when either mean is 0
    lx = single_laplace(mx, s)
    ly = single_laplace(my, s)
    with np.errstate(invalid="ignore", divide="ignore"):
        cross = s * mx * my / (mx + my + s * mx * my)
    cross = np.where((mx > 0) & (my > 0), cross, 0.0)
    return lx + ly - 1.0 + cross
