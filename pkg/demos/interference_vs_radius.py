"""
Mean interference outside an exclusion ball
===========================================

Compare Monte Carlo interference means with the radial quadratures for
singles and for pairs under no cooperation (NC) and strongest-only (OF1).
"""

from nnmcoop import BoundaryPolicy, CooperationScheme, PathLossModel, SeedSpec, Window
from nnmcoop.analytic import expected_interference_pairs, expected_interference_singles
from nnmcoop.interference import simulate_interference

NC, OF1 = CooperationScheme("NC"), CooperationScheme("OF1")
R_grid = [0.5, 1.0, 2.0, 3.0, 5.0]
beta = 4.0

# toroidal window with many observers per deployment; atoms beyond 50 m are ignored
study = simulate_interference(0.1, Window(100, 100), PathLossModel(beta, 1.0, 0.0), R_grid, [NC, OF1],
                              n_replications=200, seed=SeedSpec(3), policy=BoundaryPolicy.toroidal(),
                              observers_per_rep=100, r_max=50.0)

print("  R    I1 mc   I1 quad   I2(NC) mc  quad    I2(OF1) mc  quad")
for j, R in enumerate(R_grid):
    pl = PathLossModel(beta, 1.0, R)
    q1 = expected_interference_singles(0.1, pl, r_max=50.0)
    qn = expected_interference_pairs(0.1, pl, NC, r_max=50.0)
    qo = expected_interference_pairs(0.1, pl, OF1, r_max=50.0)
    print(f"{R:4.1f}  {study.i1_mean[j]:.4f}  {q1:.4f}    {study.i2_mean[NC][j]:.4f}  {qn:.4f}"
          f"    {study.i2_mean[OF1][j]:.4f}  {qo:.4f}")

# silencing the weaker station of each pair removes roughly a fifth of the pair interference
print(f"\nOF1 / NC at R = 1: {study.i2_mean[OF1][1] / study.i2_mean[NC][1]:.3f}")
