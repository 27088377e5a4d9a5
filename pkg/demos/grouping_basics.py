"""
Singles and pairs in a Poisson deployment
=========================================

Sample base stations, join mutual nearest neighbours into pairs and
compare the observed split with the constant ``p* = 1/(2 - gamma)``.
"""

import numpy as np

from nnmcoop import BoundaryPolicy, SeedSpec, Window, gamma_constant, group, sample_ppp
from nnmcoop.analytic import p_star

# one realization with about 2500 atoms
window = Window(50.0, 50.0)
pattern = sample_ppp(1.0, window, SeedSpec(master_seed=2024))
print(f"{len(pattern)} atoms")

# K = 2: mutual nearest neighbours become pairs, everything else is single
g = group(pattern, BoundaryPolicy.toroidal())
frac = len(g.pair_members) / len(pattern)
print(f"paired fraction {frac:.4f}  (p* = {p_star():.4f}, gamma = {gamma_constant():.4f})")

# a pair's lens (two discs of radius |x - y|) holds no third atom
a, b = g.pairs[0]
r = np.hypot(*(pattern.points[a] - pattern.points[b]))
print(f"first pair: atoms {a} and {b}, {r:.3f} m apart")

# K = 3: each pair may absorb its closest single pointing at it
g3 = group(pattern, BoundaryPolicy.toroidal(), k=3)
print(f"K=3: {len(g3.triplets)} triplets, {len(g3.pairs)} pairs, {len(g3.singles)} singles")

# the grouping ignores the density: rescaling the plane changes nothing
g_scaled = group(pattern.scaled(10.0), BoundaryPolicy.toroidal())
print("same pairs after scaling by 10:", g_scaled.pairs_set() == g.pairs_set())
