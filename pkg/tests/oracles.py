"""Independent reference implementations used only by the tests."""

import math
import warnings

import numpy as np


def brute_nn(points, width=None, height=None):
    """O(n^2) nearest neighbours; lowest index wins ties. Torus if sides given."""
    p = np.asarray(points, dtype=float)
    dx = p[:, None, 0] - p[None, :, 0]
    dy = p[:, None, 1] - p[None, :, 1]
    if width is not None:
        dx = np.abs(dx)
        dy = np.abs(dy)
        dx = np.minimum(dx, width - dx)
        dy = np.minimum(dy, height - dy)
    d = np.sqrt(dx * dx + dy * dy)
    np.fill_diagonal(d, np.inf)
    nn = d.argmin(axis=1)  # first occurrence, i.e. lowest index
    return nn, d[np.arange(len(p)), nn]


def brute_classify(points, width=None, height=None):
    """``(singles, pairs)`` as Python sets by direct definition."""
    nn, _ = brute_nn(points, width, height)
    pairs = {frozenset((i, int(nn[i]))) for i in range(len(nn)) if nn[nn[i]] == i}
    members = set().union(*pairs) if pairs else set()
    singles = set(range(len(nn))) - members
    return singles, pairs


def lens_is_empty(points, i, j):
    """True when no third atom lies in B(x_i, r) U B(x_j, r), r = |x_i - x_j|."""
    p = np.asarray(points, dtype=float)
    r = math.dist(p[i], p[j])
    for k in range(len(p)):
        if k in (i, j):
            continue
        if math.dist(p[k], p[i]) < r or math.dist(p[k], p[j]) < r:
            return False
    return True


def pair_integral_cartesian_polar(eg, lam, R, r_hi, a_coef, n_rho=200, n_phi=128):
    """``1/2 int int eg(|x|,|y|) exp(-a|x-y|^2) lam^2 dx dy`` in (r_x, rho, phi) coordinates.

    ``y = x + rho (cos phi, sin phi)``; tensor Gauss-Legendre in ``rho`` and
    ``phi`` nested inside adaptive quadrature in ``r_x``.
    """
    from scipy import integrate

    rho_max = math.sqrt(60.0 / a_coef)
    gr, wr = np.polynomial.legendre.leggauss(n_rho)
    rho = 0.5 * rho_max * (gr + 1)
    wrho = 0.5 * rho_max * wr
    gp, wp = np.polynomial.legendre.leggauss(n_phi)
    phi = math.pi * (gp + 1)
    wphi = math.pi * wp

    def inner(rx):
        ry = np.sqrt(rx * rx + rho[:, None] ** 2 + 2 * rx * rho[:, None] * np.cos(phi[None, :]))
        ok = (ry > R) & (ry <= r_hi)
        val = np.where(ok, eg(rx, np.where(ok, ry, 1.0)), 0.0)
        w = (wrho * rho * np.exp(-a_coef * rho ** 2))[:, None] * wphi[None, :]
        return 2 * math.pi * rx * float((val * w).sum())

    # the indicator edge makes the tensor rule slightly noisy, so quad cannot hit its tolerance
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tot = integrate.quad(inner, R, r_hi, limit=200, epsrel=1e-5)[0]
    return 0.5 * lam * lam * tot


def brute_triplets(points, width=None, height=None):
    """K = 3 grouping by direct definition: each pair takes its closest eligible single."""
    nn, nd = brute_nn(points, width, height)
    singles, pairs = brute_classify(points, width, height)
    owner = {i: p for p in pairs for i in p}
    best = {}
    for s in sorted(singles):
        p = owner.get(int(nn[s]))
        if p is None:
            continue
        if p not in best or (nd[s], s) < (nd[best[p]], best[p]):
            best[p] = s
    triplets = {p | {s} for p, s in best.items()}
    return singles - set(best.values()), pairs - set(best), triplets
