"""
Laplace transform on a finite window
====================================

Condition on the number of atoms in a small window, average each term over
uniform placements, and compare the series with direct simulation.
"""

import math

from nnmcoop import CooperationScheme, PathLossModel, SeedSpec, Window
from nnmcoop.interference import empirical_laplace, simulate_window_interference
from nnmcoop.laplace import LaplaceSeriesSpec, laplace_transform_pairs, laplace_transform_singles

window = Window.square(math.sqrt(20.0))  # two atoms on average at lambda = 0.1
pl = PathLossModel(4.0, 1.0, 0.0)
NC = CooperationScheme("NC")
spec = LaplaceSeriesSpec(mc_samples_per_term=20_000, seed=SeedSpec(5))

singles = laplace_transform_singles(0.1, window, pl, spec)
pairs = laplace_transform_pairs(0.1, window, pl, NC, spec)
print(f"terms kept: {singles.n_max}, Poisson tail {singles.tail_bound:.1e}")

# grouping inside the window only, observer at its centre
i1, i2 = simulate_window_interference(0.1, window, pl, NC, 20_000, SeedSpec(6))
e1 = empirical_laplace(i1, spec.s_grid)
e2 = empirical_laplace(i2, spec.s_grid)

print("     s    singles series / sim     pairs series / sim")
for (s, v1, _), (_, w1, _), (_, v2, _), (_, w2, _) in zip(singles, e1, pairs, e2):
    print(f"{s:6.2f}     {v1:.4f} / {w1:.4f}        {v2:.4f} / {w2:.4f}")
