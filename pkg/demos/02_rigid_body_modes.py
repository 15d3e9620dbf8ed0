"""
Rigid-body modes of an unsupported frame
========================================

Without supports a plane frame can translate twice and rotate once.
Those three motions show up as zero eigenvalues and a gap at k = 3.
"""

import numpy as np

from msa import assemble, build_dof_map, run_stability_analysis
from msa.fixtures import unrestrained_portal

model = unrestrained_portal()
report = run_stability_analysis(model, n_s=6, n_l=1)

lam = report.eigen.smallest_values
lam_max = report.eigen.largest_values[-1]
print("lambda / lambda_max:", np.array2string(lam / lam_max, precision=2))
print("near-zero count:", int(np.sum(lam < 1e-10 * lam_max)))
print("gap index k =", report.gap.k)
print("singular:", report.condition.singular, " kappa_est =", report.condition.kappa_est)

# each zero mode moves the whole structure, so no element is singled out
for i in range(1, 4):
    f = report.field("v", i)
    print(f"v[{i}] separated={f.separated}  suspects={f.suspects}")

# a rigid motion stores no strain energy: A u is roundoff
A = assemble(model, build_dof_map(model))
u = report.eigen.smallest_vectors[:, 0]
print("||A u|| / ||A||_1 =", f"{np.linalg.norm(A @ u) / A.norm1():.1e}")
