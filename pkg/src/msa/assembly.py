"""Element stiffness matrices and global assembly into upper-triangle sparse storage."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sps

from .model import RESTRAINED, DofMap, Element, Model, ModelError


@dataclass(frozen=True)
class ElementStiffness:
    element_id: int
    K_local: np.ndarray
    T: np.ndarray

    @property
    def K_global(self) -> np.ndarray:
        """Element matrix in global axes, ``T.T @ K_local @ T``."""
        return self.T.T @ self.K_local @ self.T


def _rotation(c: float, s: float, with_rz: bool) -> np.ndarray:
    if with_rz:
        R = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
    else:
        R = np.array([[c, s], [-s, c]])
    return np.kron(np.eye(2), R)


def element_matrices(element: Element, coords) -> ElementStiffness:
    """Local stiffness and local-to-global rotation for one element.

    ``coords`` maps node id to ``(x, y)``. Spring and bar elements act on the
    translational dofs only (4x4); beam2d is the Euler-Bernoulli frame element
    on ``(ux, uy, rz)`` at both ends (6x6).
    """
    (xa, ya), (xb, yb) = coords[element.nodes[0]], coords[element.nodes[1]]
    L = math.hypot(xb - xa, yb - ya)
    if not L > 0:
        raise ModelError(f"element {element.id}: zero-length element")
    c, s = (xb - xa) / L, (yb - ya) / L
    p = element.props

    if element.kind in ("spring", "bar"):
        k = p["k"] if element.kind == "spring" else p["ea"] / L
        K = np.zeros((4, 4))
        K[np.ix_([0, 2], [0, 2])] = k * np.array([[1.0, -1.0], [-1.0, 1.0]])
        return ElementStiffness(element.id, K, _rotation(c, s, False))

    if element.kind == "beam2d":
        a = p["ea"] / L
        b = 12.0 * p["ei"] / L**3
        d = 6.0 * p["ei"] / L**2
        e = 4.0 * p["ei"] / L
        f = 2.0 * p["ei"] / L
        K = np.array([
            [a, 0.0, 0.0, -a, 0.0, 0.0],
            [0.0, b, d, 0.0, -b, d],
            [0.0, d, e, 0.0, -d, f],
            [-a, 0.0, 0.0, a, 0.0, 0.0],
            [0.0, -b, -d, 0.0, b, -d],
            [0.0, d, f, 0.0, -d, e],
        ])
        return ElementStiffness(element.id, K, _rotation(c, s, True))

    raise ModelError(f"element {element.id}: unknown element kind {element.kind!r}")


def model_element_matrices(model: Model) -> list[ElementStiffness]:
    """Element matrices in ascending element-id order (matching ``DofMap``)."""
    coords = model.coordinates()
    return [element_matrices(el, coords) for el in model.sorted_elements()]


class SparseSymmetric:
    """Symmetric matrix stored as the CSR upper triangle (``row <= col``)."""

    def __init__(self, n: int, indptr, indices, data):
        self.n = int(n)
        self.indptr = np.asarray(indptr, dtype=np.int64)
        self.indices = np.asarray(indices, dtype=np.int64)
        self.data = np.asarray(data, dtype=float)
        if self.indptr.shape != (self.n + 1,):
            raise ValueError("indptr must have length n + 1")
        self._rows = np.repeat(np.arange(self.n), np.diff(self.indptr))
        if np.any(self.indices < self._rows):
            raise ValueError("entries must lie in the upper triangle")
        self._off = self.indices != self._rows

    @classmethod
    def from_coo(cls, n, rows, cols, vals) -> "SparseSymmetric":
        """Build from triplets; lower-triangle triplets are mirrored, duplicates summed.

        Duplicates are summed in the order given, and exact zeros are pruned.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=float)
        r = np.minimum(rows, cols)
        c = np.maximum(rows, cols)
        key = r * max(n, 1) + c
        order = np.argsort(key, kind="stable")
        key, vals = key[order], vals[order]
        if key.size:
            starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
            summed = np.add.reduceat(vals, starts)
            ukey = key[starts]
        else:
            summed = vals
            ukey = key
        keep = summed != 0.0
        ukey, summed = ukey[keep], summed[keep]
        ur, uc = ukey // max(n, 1), ukey % max(n, 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, ur + 1, 1)
        return cls(n, np.cumsum(indptr), uc, summed)

    @classmethod
    def from_dense(cls, M) -> "SparseSymmetric":
        M = np.asarray(M, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("matrix must be square")
        if not np.array_equal(M, M.T):
            raise ValueError("matrix must be exactly symmetric")
        r, c = np.nonzero(np.triu(M))
        return cls.from_coo(M.shape[0], r, c, M[r, c])

    @classmethod
    def from_scipy(cls, S) -> "SparseSymmetric":
        U = sps.triu(sps.csr_matrix(S)).tocoo()
        return cls.from_coo(S.shape[0], U.row, U.col, U.data)

    @property
    def nnz(self) -> int:
        return int(self.data.size)

    def diagonal(self) -> np.ndarray:
        d = np.zeros(self.n)
        on = ~self._off
        d[self._rows[on]] = self.data[on]
        return d

    def matvec(self, x) -> np.ndarray:
        return matvec(self, x)

    def __matmul__(self, x):
        return self.matvec(x)

    def to_scipy(self) -> sps.csc_matrix:
        """Full (both triangles) CSC copy."""
        U = sps.csr_matrix((self.data, self.indices, self.indptr), shape=(self.n, self.n))
        return (U + sps.triu(U, k=1).T).tocsc()

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def norm1(self) -> float:
        """Max absolute column sum."""
        a = np.abs(self.data)
        s = np.bincount(self._rows, weights=a, minlength=self.n).astype(float)
        s += np.bincount(self.indices[self._off], weights=a[self._off], minlength=self.n)
        return float(s.max()) if self.n else 0.0

    def scaled(self, factor: float) -> "SparseSymmetric":
        return SparseSymmetric(self.n, self.indptr, self.indices, self.data * factor)

    def coo_lines(self) -> list[str]:
        """Stored entries as ``row col value`` lines, 0-based, 17 significant digits."""
        return [f"{r} {c} {v:.17g}" for r, c, v in zip(self._rows, self.indices, self.data)]


def matvec(A: SparseSymmetric, x) -> np.ndarray:
    """``y = A x`` for upper-triangle storage, expanding symmetry on the fly."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ValueError(f"dimension mismatch: matrix is {A.n}x{A.n}, vector has shape {x.shape}")
    y = np.bincount(A._rows, weights=A.data * x[A.indices], minlength=A.n).astype(float)
    off = A._off
    y += np.bincount(A.indices[off], weights=A.data[off] * x[A._rows[off]], minlength=A.n)
    return y


def assemble(model: Model, dofmap: DofMap, elements: list[ElementStiffness] | None = None
             ) -> SparseSymmetric:
    """Scatter ``sum_e T^T K T`` into the free-dof matrix.

    Accumulation order is (element id, local row, local col), so the result is
    bitwise reproducible. Free dofs without stiffness keep an empty row.
    """
    if dofmap.n == 0:
        raise ModelError("model has no free dofs (fully restrained)")
    if elements is None:
        elements = model_element_matrices(model)
    rows, cols, vals = [], [], []
    for es, m in zip(elements, dofmap.element_dofs):
        Kg = es.K_global
        for a, ga in enumerate(m):
            if ga == RESTRAINED:
                continue
            for b, gb in enumerate(m):
                if gb == RESTRAINED or gb < ga:
                    continue
                rows.append(ga)
                cols.append(gb)
                vals.append(Kg[a, b])
    return SparseSymmetric.from_coo(dofmap.n, rows, cols, vals)
