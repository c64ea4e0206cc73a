"""Robustness of k-coherence and Schmidt-rank-k entanglement for pure states.

Closed-form values with dual and primal certificates that sandwich them, the
k-support norm, a small exact/float phase-1 simplex solver and a Schmidt-basis
lift to bipartite entanglement.
"""
from .closed_form import (RobustnessValue, k_support_dual_norm, k_support_norm,
                          robustness_value, value_for)
from .core import BranchData, CanonicalState, boundary_margin, canonicalize, select_branch, tail_sums
from .document import coherence_document, dumps, entanglement_document, verify_document
from .dual import DualReport, DualWitness, build_dual_witness, max_principal_submatrix_eig, verify_dual_witness
from .entanglement import (EntanglementCertificate, SchmidtData, entanglement_robustness,
                           lift_certificates, schmidt_decompose)
from .errors import CertificationError, IterationLimitError, LpInfeasibleError, ValidationError
from .lp import FeasibilityResult, LpProblem, solve_feasibility
from .primal import (Certificate, I2Decomposition, LpConfig, PrimalDecomposition, build_primal,
                     build_primal_ell_eq_1, build_primal_ell_eq_k, build_primal_middle, certify,
                     certify_branch, decompose_into_I2)

__version__ = "0.1.0"
