"""
Repulsion among singles, attraction within pairs
================================================

Estimate the nearest-neighbour (G), empty-space (F) and J functions of
both subprocesses. ``J > 1`` signals repulsion and ``J < 1`` attraction.
"""

import numpy as np

from nnmcoop import BoundaryPolicy, SeedSpec, Window
from nnmcoop.analytic import nn_cdf_pairs
from nnmcoop.statistics import (ReplicationPlan, estimate_class_fractions, estimate_empty_space,
                                estimate_nn_function, estimate_voronoi_shares, j_function)

plan = ReplicationPlan(200, 1.0, Window(50, 50), BoundaryPolicy(margin=5.0), SeedSpec(7))

cf = estimate_class_fractions(plan)
print(f"paired fraction {cf.frac_paired:.4f} +- {cf.frac_paired_stderr:.4f}")

# probes take the class of their nearest atom, i.e. of the Voronoi cell they fall in
vs = estimate_voronoi_shares(plan, 5000)
print(f"Voronoi area share of singles {vs.share_singles:.4f}, pairs {vs.share_pairs:.4f}")

radii = plan.default_radii(16)
for which in ("singles", "pairs"):
    G = estimate_nn_function(plan, which, radii)
    F = estimate_empty_space(plan, which, radii, n_probes=2000)
    J = j_function(G, F)
    print(f"\n{which}:  r      G      F      J")
    for r, gv, fv, jv in zip(J.radii[::3], G.values[::3], F.values[::3], J.values[::3]):
        print(f"       {r:5.3f}  {gv:.3f}  {fv:.3f}  {jv:.3f}")

# the pair distance law is Rayleigh
G = estimate_nn_function(plan, "pairs", radii)
print(f"\nsup |G_pairs - 1 + exp(-lambda pi r^2 (2 - gamma))| = "
      f"{np.max(np.abs(G.values - nn_cdf_pairs(radii, 1.0))):.4f}")
