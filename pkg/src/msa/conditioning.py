"""2-norm condition estimate of the stiffness matrix from its extreme eigenvalues."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .assembly import SparseSymmetric
from .eigen import EigenSet, FactorizationError, solve_extreme_eigenpairs

DEFAULT_THRESHOLD = 1e10


@dataclass(frozen=True)
class ConditionEstimate:
    kappa_est: float
    lambda_max_est: float
    lambda_min_est: float
    ill_conditioned: bool
    threshold: float
    singular: bool = False


def numerical_zero(A: SparseSymmetric) -> float:
    """Eigenvalues at or below this level are indistinguishable from zero in binary64."""
    return 10.0 * A.n * np.finfo(float).eps * A.norm1()


def estimate_condition(A: SparseSymmetric, threshold: float = DEFAULT_THRESHOLD,
                       eigenset: EigenSet | None = None, tol: float = 1e-8,
                       seed: int = 42) -> ConditionEstimate:
    """Estimate ``kappa_2(A) = lambda_max / lambda_min`` and flag ill-conditioning.

    Extreme eigenvalues already present in ``eigenset`` are reused; a missing
    end is computed with the Lanczos solver. A matrix whose smallest
    eigenvalue is at roundoff level, or whose shifted factorisation breaks
    down, is reported as singular with ``kappa_est = inf``.
    """
    if A.n < 1:
        raise ValueError("empty matrix")
    need_lo = eigenset is None or eigenset.n_s == 0
    need_hi = eigenset is None or eigenset.n_l == 0
    lam_min = None if need_lo else float(eigenset.smallest_values[0])
    lam_max = None if need_hi else float(eigenset.largest_values[-1])
    if need_hi:
        lam_max = float(solve_extreme_eigenpairs(A, 0, 1, tol=tol, seed=seed).largest_values[-1])
    if need_lo:
        try:
            extra = solve_extreme_eigenpairs(A, 1, 0, tol=tol, seed=seed)
        except FactorizationError:
            return ConditionEstimate(math.inf, lam_max, 0.0, True, threshold, singular=True)
        lam_min = float(extra.smallest_values[0])

    singular = bool(lam_max <= 0.0 or lam_min <= numerical_zero(A))
    kappa = math.inf if singular else max(lam_max / lam_min, 1.0)
    return ConditionEstimate(kappa, lam_max, lam_min, bool(kappa > threshold), threshold,
                             singular=singular)
