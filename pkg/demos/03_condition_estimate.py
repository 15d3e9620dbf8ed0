"""
Condition estimates from extreme eigenvalues
============================================

kappa_2 of a symmetric positive definite matrix is lambda_max / lambda_min.
Only the two ends of the spectrum are needed, which Lanczos finds cheaply.
"""

import numpy as np

from msa import (ConvergenceError, SparseSymmetric, assemble, build_dof_map,
                 estimate_condition, solve_extreme_eigenpairs)
from msa.fixtures import spring_pair


def laplacian(n):
    i = np.arange(n)
    return SparseSymmetric.from_coo(n, np.r_[i, i[:-1]], np.r_[i, i[1:]],
                                    np.r_[np.full(n, 2.0), np.full(n - 1, -1.0)])


# 1D Laplacian: spectrum is 2 - 2 cos(j pi / (n + 1)), j = 1..n
n = 100
A = laplacian(n)
exact = 2 - 2 * np.cos(np.arange(1, n + 1) * np.pi / (n + 1))
est = estimate_condition(A)
print(f"estimated kappa = {est.kappa_est:.10e}")
print(f"exact kappa     = {exact[-1] / exact[0]:.10e}")

es = solve_extreme_eigenpairs(A, 3, 3)
print("smallest:", es.smallest_values)
print("exact   :", exact[:3])
print("largest :", es.largest_values)
print("exact   :", exact[-3:])

# the threshold only sets the flag
print("ill-conditioned at 1e3?", estimate_condition(A, threshold=1e3).ill_conditioned)

# top of a long Laplacian is tightly clustered; the default step cap gives up
big = laplacian(300)
try:
    solve_extreme_eigenpairs(big, 0, 1)
except ConvergenceError as err:
    print("default cap:", err)
print("with max_steps=300:", solve_extreme_eigenpairs(big, 0, 1, max_steps=300).largest_values)

# spring only resists ux at node 2; uy and rz are free with no stiffness
m = spring_pair()
S = assemble(m, build_dof_map(m))
print(estimate_condition(S))
