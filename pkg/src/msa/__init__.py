"""Model stability analysis: locate the elements behind an ill-conditioned stiffness matrix."""

__version__ = "0.1.0"

from .assembly import (ElementStiffness, SparseSymmetric, assemble, element_matrices,
                       matvec, model_element_matrices)
from .conditioning import ConditionEstimate, estimate_condition
from .eigen import (ConvergenceError, EigenSet, FactorizationError, dense_oracle_eig,
                    jacobi_eigh, solve_extreme_eigenpairs)
from .model import (DofMap, Element, Model, ModelError, Node, Restraint, build_dof_map,
                    parse_model, serialize_model)
from .report import emit_svg, report_to_json, write_report
from .stability import (EnergyField, GapResult, StabilityReport, detect_gap, energy_s,
                        energy_v, normalize_energies, partition_two_clusters,
                        run_stability_analysis)
