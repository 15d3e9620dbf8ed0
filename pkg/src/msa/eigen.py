"""Extreme eigenpairs of sparse symmetric matrices.

The solver is Lanczos with full reorthogonalisation. Largest pairs come from
Lanczos on ``A``; smallest pairs from Lanczos on ``(A - sigma I)^-1`` with a
small negative shift, so the factorised operator stays positive definite when
``A`` is singular. Converged Ritz pairs are locked and Lanczos is restarted on
the deflated space, which is what recovers repeated eigenvalues (a single
Krylov sequence only ever sees one vector of a degenerate eigenspace).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .assembly import SparseSymmetric

log = logging.getLogger(__name__)

DENSE_ORACLE_MAX_N = 2000


class ConvergenceError(RuntimeError):
    """Lanczos did not deliver the requested pairs within the step cap.

    ``residuals`` holds the best residual norms reached for the pairs that
    were being iterated when the cap was hit.
    """

    def __init__(self, msg: str, residuals=()):
        super().__init__(msg)
        self.residuals = list(residuals)


class FactorizationError(ConvergenceError):
    """The shifted matrix could not be factorised (numerically singular)."""


@dataclass
class EigenSet:
    """Extreme eigenpairs. Vectors are columns, unit 2-norm, eigenvalues ascending."""

    smallest_values: np.ndarray
    smallest_vectors: np.ndarray
    largest_values: np.ndarray
    largest_vectors: np.ndarray
    smallest_residuals: np.ndarray
    largest_residuals: np.ndarray
    n: int
    seed: int
    tol: float
    shift: float = 0.0
    steps: dict = field(default_factory=dict)

    @property
    def n_s(self) -> int:
        return len(self.smallest_values)

    @property
    def n_l(self) -> int:
        return len(self.largest_values)

    def pairs(self):
        """Yield ``(global_index, value, vector)``; indices are 1-based over the full spectrum."""
        for i, lam in enumerate(self.smallest_values):
            yield i + 1, float(lam), self.smallest_vectors[:, i]
        start = self.n - self.n_l + 1
        for i, lam in enumerate(self.largest_values):
            yield start + i, float(lam), self.largest_vectors[:, i]


def _fix_sign(U: np.ndarray) -> np.ndarray:
    # deterministic sign: entry of largest magnitude (first on ties) is positive
    for j in range(U.shape[1]):
        i = np.argmax(np.abs(U[:, j]))
        if U[i, j] < 0:
            U[:, j] = -U[:, j]
    return U


def _residuals(A: SparseSymmetric, lam, U) -> np.ndarray:
    return np.array([np.linalg.norm(A.matvec(U[:, j]) - lam[j] * U[:, j])
                     for j in range(U.shape[1])])


class _Lanczos:
    """Deflated Lanczos runs on one operator, collecting its largest eigenpairs.

    ``op`` is the operator whose largest eigenvalues are wanted; the Ritz
    vectors it produces are judged by their residual against ``A``.
    """

    def __init__(self, A, op, want, tol, rng, cap, more_extreme):
        self.A = A
        self.op = op
        self.want = want
        self.rng = rng
        self.cap = cap
        self.steps = 0
        self.more_extreme = more_extreme
        self.threshold = tol * max(1.0, A.norm1())
        self.locked = np.zeros((A.n, 0))
        self.locked_values = np.zeros(0)
        self.last_residuals = []

    def _deflate(self, w):
        L = self.locked
        if L.shape[1]:
            w = w - L @ (L.T @ w)
        return w

    def _ritz(self, Q, alphas, betas, count):
        m = len(alphas)
        T = np.diag(alphas) + np.diag(betas[:m - 1], 1) + np.diag(betas[:m - 1], -1)
        theta, Y = np.linalg.eigh(T)
        order = np.argsort(theta)[::-1][:count]
        X = Q[:, :m] @ Y[:, order]
        X /= np.linalg.norm(X, axis=0)
        lam = np.array([X[:, j] @ self.A.matvec(X[:, j]) for j in range(X.shape[1])])
        res = _residuals(self.A, lam, X)
        return lam, X, res

    def run(self, count):
        """One Lanczos run on the deflated space; returns up to ``count`` converged pairs.

        The returned pairs are the leading converged Ritz pairs, in order of
        decreasing operator eigenvalue.
        """
        n = self.A.n
        dim = n - self.locked.shape[1]
        if dim <= 0:
            return np.zeros(0), np.zeros((n, 0)), True
        q = self._deflate(self.rng.standard_normal(n))
        q = self._deflate(q)
        q /= np.linalg.norm(q)
        Q = np.zeros((n, min(dim, self.cap - self.steps) + 1))
        Q[:, 0] = q
        alphas, betas = [], []
        opnorm = 0.0
        count = min(count, dim)
        m = 0
        while True:
            if self.steps >= self.cap:
                raise ConvergenceError(
                    f"Lanczos step cap {self.cap} reached with {self.locked.shape[1]} of "
                    f"{self.want} pairs converged; residuals {self.last_residuals}",
                    self.last_residuals)
            w = self.op(Q[:, m])
            self.steps += 1
            w = self._deflate(w)
            alpha = Q[:, m] @ w
            w -= alpha * Q[:, m]
            if m > 0:
                w -= betas[-1] * Q[:, m - 1]
            # full reorthogonalisation, twice is enough
            for _ in range(2):
                w -= Q[:, :m + 1] @ (Q[:, :m + 1].T @ w)
                w = self._deflate(w)
            beta = np.linalg.norm(w)
            alphas.append(alpha)
            betas.append(beta)
            opnorm = max(opnorm, abs(alpha), beta)
            m += 1
            exhausted = beta <= 1e-13 * opnorm or m >= dim
            if exhausted or (m >= count and (m % 5 == 0 or self.steps >= self.cap)):
                k = min(count, m)
                lam, X, res = self._ritz(Q, np.array(alphas), np.array(betas), k)
                self.last_residuals = [float(r) for r in res]
                ok = res <= self.threshold
                lead = k if ok.all() else int(np.argmin(ok))
                if lead == count or (exhausted and lead > 0):
                    return lam[:lead], X[:, :lead], exhausted
                if exhausted:
                    # invariant subspace without a converged pair: restart fresh
                    return np.zeros(0), np.zeros((n, 0)), False
            if m >= Q.shape[1]:
                Q = np.hstack([Q, np.zeros((n, 16))])
            Q[:, m] = w / beta

    def _lock(self, lam, X):
        self.locked = np.hstack([self.locked, X])
        self.locked_values = np.concatenate([self.locked_values, lam])

    def solve(self):
        while self.locked.shape[1] < self.want:
            lam, X, _ = self.run(self.want - self.locked.shape[1])
            self._lock(lam, X)
        # a missed copy of a repeated eigenvalue shows up in a further deflated run
        while self.locked.shape[1] < self.A.n:
            try:
                lam, X, _ = self.run(1)
            except ConvergenceError:
                log.debug("verification run stopped at the step cap")
                break
            if lam.size == 0:
                continue
            worst = self._least_extreme()
            if not self.more_extreme(lam[0], self.locked_values[worst], self.threshold):
                break
            self.locked = np.delete(self.locked, worst, axis=1)
            self.locked_values = np.delete(self.locked_values, worst)
            self._lock(lam, X)
        return self._rayleigh_ritz()

    def _least_extreme(self):
        vals = self.locked_values
        worst = 0
        for j in range(1, len(vals)):
            if self.more_extreme(vals[worst], vals[j], 0.0):
                worst = j
        return worst

    def _rayleigh_ritz(self):
        X = self.locked
        if X.shape[1] == 0:
            return np.zeros(0), X
        X, _ = np.linalg.qr(X)
        AX = np.column_stack([self.A.matvec(X[:, j]) for j in range(X.shape[1])])
        H = X.T @ AX
        H = 0.5 * (H + H.T)
        lam, Y = np.linalg.eigh(H)
        return lam, _fix_sign(X @ Y)


def solve_extreme_eigenpairs(A: SparseSymmetric, n_s: int, n_l: int, tol: float = 1e-8,
                             seed: int = 42, shift_eps: float = 1e-8,
                             max_steps: int | None = None) -> EigenSet:
    """The ``n_s`` smallest and ``n_l`` largest eigenpairs of a symmetric PSD matrix.

    Every returned pair satisfies ``||A u - lam u|| <= tol * max(1, ||A||_1)``.
    Each end gets at most ``max_steps`` Lanczos steps, by default
    ``10 * (n_s + n_l) + 200``. Results are deterministic for a fixed ``seed``.
    """
    n = A.n
    if n_s < 0 or n_l < 0:
        raise ValueError("n_s and n_l must be non-negative")
    if n_s + n_l < 1:
        raise ValueError("at least one eigenpair must be requested")
    if n_s + n_l > n:
        raise ValueError(f"n_s + n_l = {n_s + n_l} exceeds the matrix dimension {n}")

    rng = np.random.default_rng(seed)
    cap = 10 * (n_s + n_l) + 200 if max_steps is None else max_steps
    anorm = A.norm1()
    sigma = -shift_eps * anorm if anorm > 0 else -shift_eps
    steps = {}

    lo_vals, lo_vecs = np.zeros(0), np.zeros((n, 0))
    if n_s:
        M = (A.to_scipy() - sigma * sps.identity(n, format="csc")).tocsc()
        try:
            lu = spla.splu(M)
        except RuntimeError as exc:
            raise FactorizationError(f"shift-invert factorisation failed: {exc}") from None
        solver = _Lanczos(A, lu.solve, n_s, tol, rng, cap,
                          more_extreme=lambda a, b, t: a < b - t)
        lo_vals, lo_vecs = solver.solve()
        steps["smallest"] = solver.steps

    hi_vals, hi_vecs = np.zeros(0), np.zeros((n, 0))
    if n_l:
        solver = _Lanczos(A, A.matvec, n_l, tol, rng, cap,
                          more_extreme=lambda a, b, t: a > b + t)
        hi_vals, hi_vecs = solver.solve()
        steps["largest"] = solver.steps

    log.debug("Lanczos steps: %s", steps)
    return EigenSet(
        smallest_values=lo_vals,
        smallest_vectors=lo_vecs,
        largest_values=hi_vals,
        largest_vectors=hi_vecs,
        smallest_residuals=_residuals(A, lo_vals, lo_vecs),
        largest_residuals=_residuals(A, hi_vals, hi_vecs),
        n=n,
        seed=seed,
        tol=tol,
        shift=sigma,
        steps=steps,
    )


def jacobi_eigh(M, tol: float = 1e-14, max_sweeps: int = 60):
    """Cyclic Jacobi eigendecomposition of a dense symmetric matrix.

    Returns ascending eigenvalues and orthonormal eigenvectors (columns).
    Sweeps stop once the off-diagonal Frobenius norm is at most
    ``tol * ||M||_F``.
    """
    A = np.array(M, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    fro = np.linalg.norm(A)
    if fro == 0.0 or n < 2:
        return np.diag(A).copy(), V
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app, aqq = A[p, p], A[q, q]
                tau = (aqq - app) / (2.0 * apq)
                # tau*tau overflows past ~1e154; 1/(2 tau) is exact to roundoff there
                if abs(tau) > 1e150:
                    t = 0.5 / tau
                else:
                    t = (1.0 if tau >= 0 else -1.0) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                ap, aq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * ap - s * aq
                A[:, q] = s * ap + c * aq
                A[p, :] = A[:, p]
                A[q, :] = A[:, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    else:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    lam = np.diag(A).copy()
    order = np.argsort(lam, kind="stable")
    return lam[order], V[:, order]


def dense_oracle_eig(A: SparseSymmetric):
    """Full spectrum of ``A`` by cyclic Jacobi; a verification oracle for small ``n``."""
    if A.n > DENSE_ORACLE_MAX_N:
        raise ValueError(f"dense oracle limited to n <= {DENSE_ORACLE_MAX_N}, got {A.n}")
    return jacobi_eigh(A.to_dense())
