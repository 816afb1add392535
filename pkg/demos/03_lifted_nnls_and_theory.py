"""
The lifted picture: NNLS as a linear inverse problem
====================================================

Stacking vec(a_k a_k^H) as columns gives a D_c^2 x K_c matrix; NNLS on the
sample covariance is ordinary non-negative least squares against it.  Its
rank caps at D_c(D_c - 1) + 1, which is why far more users than pilot
length can be identified.
"""

import numpy as np

from covad import ScenarioConfig, SolverOptions, draw_scenario, nnls_cost, run_coordinate_descent
from covad.lifted import (
    TheoremParams,
    build_lifted_matrix,
    complex_rank,
    generic_lifted_rank,
    nnls_oracle,
    theory_report,
    vec,
)

# rank of the lifted matrix for D_c = 4: it stops growing at 13
for K in (8, 12, 13, 14, 20):
    sc = draw_scenario(ScenarioConfig(D_c=4, K_c=K, A_c=0, M=1, rng_seed=K))
    print(f"D_c=4 K_c={K:2d}  rank={complex_rank(build_lifted_matrix(sc.A)):2d}  "
          f"expected={generic_lifted_rank(4, K)}")

# coordinate descent and an independent accelerated projected-gradient solve agree
sc = draw_scenario(ScenarioConfig(D_c=10, K_c=60, A_c=8, M=80, rng_seed=4))
g_cd, _ = run_coordinate_descent(sc.sigma_hat, sc.A, 1.0, SolverOptions("nnls", tol=1e-12))
ref = nnls_oracle(vec(sc.sigma_hat), build_lifted_matrix(sc.A), 1.0)
print("coordinate descent cost", nnls_cost(g_cd, sc.A, 1.0, sc.sigma_hat))
print("projected gradient cost", nnls_cost(ref.x, sc.A, 1.0, sc.sigma_hat), "iters", ref.iterations)
print("max |difference|", np.max(np.abs(g_cd - ref.x)))

# with the exact covariance (M -> infinity) NNLS recovers more active users than D_c
sc = draw_scenario(ScenarioConfig(D_c=10, K_c=91, A_c=20, M=1, rng_seed=5))
g, _ = run_coordinate_descent(sc.sigma_true, sc.A, 1.0, SolverOptions("nnls", tol=1e-13, max_sweeps=50000))
print("A_c=20 > D_c=10, exact covariance: max error", np.max(np.abs(g - sc.activity.gamma)))

# the sampling condition and bound constants, as the check-theory command prints them
for line in theory_report(100, 2000, 200, TheoremParams(delta=0.5, c_prime=1.0, s=200)):
    print("  ", line)
