"""Model stability analysis: spectral gap, per-element energies and their clustering.

For an ill-conditioned stiffness matrix the eigenvectors of the smallest
eigenvalues below a spectral gap are concentrated on weakly connected dofs.
Projecting each such eigenvector onto the elements (``energy_v``) and
splitting the normalised values in two picks out the elements that touch
those dofs. The largest eigenpairs are treated the same way with the strain
energy ``energy_s``, which exposes disproportionately stiff elements.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .assembly import ElementStiffness, assemble, model_element_matrices
from .conditioning import ConditionEstimate, estimate_condition, numerical_zero
from .eigen import EigenSet, solve_extreme_eigenpairs
from .model import RESTRAINED, DofMap, Model, build_dof_map, serialize_model

EIGEN_FLOOR = 1e-300
ENERGY_FLOOR = 1e-15
# smallest ratio between neighbouring sorted energies that counts as a cluster boundary
SEPARATION_RATIO = 1e3

SUSPECT = "suspect"
SOUND = "sound"

NO_GAP_WARNING = "no spectral gap; try a larger n_s"


@dataclass(frozen=True)
class GapResult:
    """``k`` is the 1-based index of the last eigenvalue inside the small cluster, or None."""

    k: int | None
    gf: float
    # (candidate k, lambda_{k-1}/lambda_k, gf * lambda_k/lambda_{k+1})
    table: tuple[tuple[int, float, float], ...] = ()


@dataclass
class EnergyField:
    eigen_index: int
    kind: str  # "v" or "s"
    eigenvalue: float
    element_ids: tuple[int, ...]
    raw: np.ndarray
    normalized: np.ndarray
    labels: tuple[str, ...]
    degenerate: bool = False
    separated: bool = True

    @property
    def suspects(self) -> list[int]:
        return [e for e, lab in zip(self.element_ids, self.labels) if lab == SUSPECT]


@dataclass
class StabilityReport:
    version: str
    input_digest: str
    parameters: dict
    condition: ConditionEstimate
    eigen: EigenSet
    gap: GapResult | None
    fields: list[EnergyField] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def field(self, kind: str, eigen_index: int) -> EnergyField:
        for f in self.fields:
            if f.kind == kind and f.eigen_index == eigen_index:
                return f
        raise KeyError((kind, eigen_index))


def detect_gap(lambdas, gf: float, zero_level: float = 0.0) -> GapResult:
    """Find the smallest k < n_s with ``l[k-1]/l[k] > gf * l[k]/l[k+1]``.

    Eigenvalues at or below ``max(zero_level, 1e-300)`` are clamped to
    ``1e-300`` first, so exact (or roundoff-level) zeros register as maximal
    gaps. At ``k = 1`` the undefined left ratio is taken as 1.
    """
    if gf < 1:
        raise ValueError(f"gap factor must be >= 1, got {gf}")
    lam = np.asarray(lambdas, dtype=float)
    if lam.size < 2:
        return GapResult(None, gf, ())
    if np.any(np.diff(lam) < 0):
        raise ValueError("eigenvalues must be ascending")
    lam = np.where(lam <= max(zero_level, EIGEN_FLOOR), EIGEN_FLOOR, lam)
    table = []
    found = None
    for k in range(1, lam.size):
        left = 1.0 if k == 1 else lam[k - 2] / lam[k - 1]
        right = gf * lam[k - 1] / lam[k]
        table.append((k, float(left), float(right)))
        if found is None and left > right:
            found = k
    return GapResult(found, gf, tuple(table))


def energy_v(u, dofmap: DofMap) -> np.ndarray:
    """``v_e = 1/2 * sum(u[m_e]**2)`` over the free entries of each element's dofs."""
    u = np.asarray(u, dtype=float)
    out = np.empty(len(dofmap.element_dofs))
    for i, m in enumerate(dofmap.element_dofs):
        ue = u[m[m != RESTRAINED]]
        out[i] = 0.5 * (ue @ ue)
    return out


def energy_s(u, elements: list[ElementStiffness], dofmap: DofMap) -> np.ndarray:
    """Element strain energy ``s_e = 1/2 * u_e^T (T^T K T) u_e`` with restrained entries zero."""
    u = np.asarray(u, dtype=float)
    out = np.empty(len(dofmap.element_dofs))
    for i, (es, m) in enumerate(zip(elements, dofmap.element_dofs)):
        ue = np.where(m == RESTRAINED, 0.0, u[np.maximum(m, 0)])
        out[i] = max(0.5 * (ue @ es.K_global @ ue), 0.0)
    return out


def normalize_energies(raw):
    """Scale so the largest value is exactly 1. Returns ``(values, degenerate)``.

    An all-zero field has nothing to normalise and is returned as zeros with
    ``degenerate=True``.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size == 0:
        raise ValueError("no elements")
    top = raw.max()
    if not top > 0:
        return np.zeros_like(raw), True
    return raw / top, False


def partition_two_clusters(values):
    """Split normalised energies into suspect and sound elements.

    Values are sorted in descending order, floored at 1e-15, and split at the
    widest gap in log-value between neighbours (the first one on ties, which
    keeps the suspect cluster small). When no neighbour ratio reaches
    ``SEPARATION_RATIO`` there is no separation and every element is suspect.

    Returns ``(labels, separated)``.
    """
    v = np.asarray(values, dtype=float)
    n = v.size
    if n == 0:
        return (), False
    order = np.argsort(-v, kind="stable")
    logs = np.log(np.maximum(v[order], ENERGY_FLOOR))
    if n == 1:
        return (SUSPECT,), False
    gaps = logs[:-1] - logs[1:]
    split = int(np.argmax(gaps))
    if gaps[split] < math.log(SEPARATION_RATIO):
        return (SUSPECT,) * n, False
    labels = [SOUND] * n
    for i in order[: split + 1]:
        labels[i] = SUSPECT
    return tuple(labels), True


def _field(kind, index, lam, raw, dofmap) -> EnergyField:
    normed, degenerate = normalize_energies(raw)
    if degenerate:
        labels, separated = (SOUND,) * len(raw), False
    else:
        labels, separated = partition_two_clusters(normed)
    return EnergyField(index, kind, lam, dofmap.element_ids, raw, normed, labels,
                       degenerate, separated)


def run_stability_analysis(model: Model, n_s: int = 8, n_l: int = 0, gf: float = 10.0,
                           tol: float = 1e-8, cond_threshold: float = 1e10, seed: int = 42,
                           input_digest: str | None = None) -> StabilityReport:
    """Full analysis of one model.

    Assembles the stiffness matrix, solves for the extreme eigenpairs,
    estimates the condition number, looks for a spectral gap among the
    smallest eigenvalues and builds clustered energy fields: ``v`` for the
    eigenvectors inside the gap and ``s`` for every largest pair. Without a
    gap the report carries a warning and no ``v`` fields.
    """
    if n_s < 0 or n_l < 0:
        raise ValueError("n_s and n_l must be non-negative")
    if n_s == 0 and n_l == 0:
        raise ValueError("n_s and n_l cannot both be zero")
    if gf < 1:
        raise ValueError(f"gap factor must be >= 1, got {gf}")

    dofmap = build_dof_map(model)
    elements = model_element_matrices(model)
    A = assemble(model, dofmap, elements)
    eig = solve_extreme_eigenpairs(A, n_s, n_l, tol=tol, seed=seed)
    cond = estimate_condition(A, cond_threshold, eigenset=eig, tol=tol, seed=seed)

    if input_digest is None:
        input_digest = hashlib.sha256(serialize_model(model).encode()).hexdigest()
    report = StabilityReport(
        version=__version__,
        input_digest=input_digest,
        parameters={"n_s": n_s, "n_l": n_l, "gf": gf, "tol": tol,
                    "cond_threshold": cond_threshold, "seed": seed},
        condition=cond,
        eigen=eig,
        gap=None,
    )

    if n_s:
        gap = detect_gap(eig.smallest_values, gf, zero_level=numerical_zero(A))
        report.gap = gap
        if gap.k is None:
            report.warnings.append(NO_GAP_WARNING)
        else:
            for i in range(gap.k):
                u = eig.smallest_vectors[:, i]
                report.fields.append(_field("v", i + 1, float(eig.smallest_values[i]),
                                            energy_v(u, dofmap), dofmap))

    start = eig.n - eig.n_l + 1
    for i in range(eig.n_l):
        u = eig.largest_vectors[:, i]
        report.fields.append(_field("s", start + i, float(eig.largest_values[i]),
                                    energy_s(u, elements, dofmap), dofmap))

    for f in report.fields:
        if f.degenerate:
            report.warnings.append(
                f"{f.kind}-energy field for eigenpair {f.eigen_index} is identically zero")
    return report
