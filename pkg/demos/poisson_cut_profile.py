"""
A Poisson solve with error bars that mean something
===================================================

Solves -lap u = f on the unit square from boundary values plus interior
source observations, with the oscillatory manufactured solution
u = sin(pi x) cos(2 pi (y^2 + x)). Both a squared-exponential GP and a
one-layer erf network kernel go through the same joint-covariance
machinery; along the diagonal cut y = x the posterior std tracks the
actual error, which is the point of carrying the full covariance.
"""

import numpy as np

from nngp.pde import POISSON_PRESETS, poisson_solve

# Same 120-point design for both kernels (these two presets share it).
for name in ("s2-gp-large", "s2-nngp-small"):
    p = POISSON_PRESETS[name]
    r = poisson_solve(p)
    # where the cut-line error is largest, the band should be widest
    worst = int(np.argmax(np.abs(r.cut_mean - r.cut_exact)))
    print(f"{name} ({p.family}, N_u={p.n_boundary}, N_f={p.n_interior}):")
    print(f"  cut-line rel-L2 error  {r.cut_error:.4f}")
    print(f"  mean cut-line std      {r.mean_cut_std:.4f}")
    print(f"  worst point x=y={r.cut_points[worst, 0]:.2f}: "
          f"|err|={abs(r.cut_mean[worst] - r.cut_exact[worst]):.4f}, "
          f"2*std={2 * r.cut_std[worst]:.4f}")
    print(f"  boundary std (exact data there): "
          f"max {r.boundary_std.max():.2e}\n")
