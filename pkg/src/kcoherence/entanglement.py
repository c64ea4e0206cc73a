"""Schmidt-rank-k entanglement of bipartite pure states.

Both k-robustnesses of entanglement of a pure state equal the robustness of
k-coherence of its Schmidt coefficient vector. Certificates transfer through
the Schmidt basis: a coherence atom ``x`` becomes ``sum_i x_i |l_i> (x) |r_i>``,
which has Schmidt rank at most the support size of ``x``, and the dual factor
``a`` becomes ``b = sum_i a_i |l_i> (x) |r_i>``.

Amplitude matrices are indexed ``M[i, j] = <i, j|v>`` so that the state vector
is ``M.reshape(-1)`` (row-major, left system first).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_NORM_TOLERANCE, branch_for, canonicalize, check_k
from .errors import ValidationError
from .primal import Certificate, DEFAULT_TOLERANCE, LpConfig, certify, certify_branch

DEFAULT_TRUNCATION = 1e-12


@dataclass(frozen=True)
class SchmidtData:
    r'''Schmidt decomposition ``v = sum_i lambda_i |l_i> (x) |r_i>``.

    Attributes:
        coefficients (np.ndarray): ``lambda_1 >= ... >= lambda_r > 0``
        left_basis (np.ndarray): m x r, orthonormal columns ``l_i``
        right_basis (np.ndarray): n x r, orthonormal columns ``r_i``
        dims (tuple): ``(m, n)``
        truncation_tolerance (float): coefficients at or below this were dropped
    '''
    coefficients: np.ndarray
    left_basis: np.ndarray
    right_basis: np.ndarray
    dims: tuple
    truncation_tolerance: float = DEFAULT_TRUNCATION

    @property
    def rank(self) -> int:
        return len(self.coefficients)

    def product_basis(self) -> np.ndarray:
        """``(m*n) x r`` matrix whose columns are ``|l_i> (x) |r_i>``."""
        m, n = self.dims
        L, R = self.left_basis, self.right_basis
        return (L[:, None, :] * R[None, :, :]).reshape(m * n, self.rank)

    def state_vector(self) -> np.ndarray:
        return self.product_basis() @ self.coefficients


@dataclass(frozen=True)
class EntanglementCertificate:
    r'''Value and transported certificates for the k-robustness of entanglement.

    Attributes:
        value (float): robustness ``R_k`` of the pure state
        gamma_norm (float): k-projective tensor norm of ``|v><v|``, ``value + 1``
        k (int): Schmidt-rank level
        dual_vector_b (np.ndarray): dual vector in the product space
        lifted_atoms (np.ndarray): product-space atoms (rows), Schmidt rank <= k
        weights (np.ndarray): probability vector over the lifted atoms
        lifted_slack (np.ndarray): ``sum_x p_x w w^dag - |v><v|``
        coherence (Certificate | None): certificate on the Schmidt vector, if one was needed
        checks (dict): product-space discrepancies (see ``lift_certificates``)
    '''
    value: float
    gamma_norm: float
    k: int
    dual_vector_b: np.ndarray
    lifted_atoms: np.ndarray
    weights: np.ndarray
    lifted_slack: np.ndarray
    coherence: Certificate | None
    checks: dict

    def atom_schmidt_ranks(self, dims, threshold: float = 1e-9) -> list:
        m, n = dims
        ranks = []
        for w in self.lifted_atoms:
            sv = np.linalg.svd(w.reshape(m, n), compute_uv=False)
            ranks.append(int(np.count_nonzero(sv > threshold)))
        return ranks


def schmidt_decompose(state_matrix, truncation_tolerance: float = DEFAULT_TRUNCATION,
                      norm_tolerance: float = DEFAULT_NORM_TOLERANCE) -> SchmidtData:
    r'''Schmidt decomposition of a bipartite pure state via the SVD.

    Parameters:
        state_matrix (array_like): m x n amplitude matrix with unit Frobenius norm
        truncation_tolerance (float): drop Schmidt coefficients at or below this
        norm_tolerance (float): allowed deviation of the Frobenius norm from 1;
            the matrix is rescaled to unit norm

    Returns:
        schmidt (SchmidtData)
    '''
    M = np.asarray(state_matrix)
    if M.dtype == object:
        M = M.astype(complex)
    if M.ndim != 2 or 0 in M.shape:
        raise ValidationError(f"expected a non-empty 2-d amplitude matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValidationError("amplitude matrix contains non-finite entries")
    norm = float(np.linalg.norm(M))
    if abs(norm - 1) > norm_tolerance:
        raise ValidationError(f"amplitude matrix has Frobenius norm {norm!r}, not 1")
    M = M / norm
    U, sv, Vh = np.linalg.svd(M, full_matrices=False)
    r = int(np.count_nonzero(sv > truncation_tolerance))
    lam = sv[:r] / np.linalg.norm(sv[:r])
    return SchmidtData(coefficients=lam, left_basis=U[:, :r], right_basis=Vh[:r].T,
                       dims=M.shape, truncation_tolerance=truncation_tolerance)


def _lift(schmidt: SchmidtData, a, atoms, weights, slack, value, k):
    P = schmidt.product_basis()
    v = schmidt.state_vector()
    b = P @ np.asarray(a, dtype=float)
    W = np.asarray(atoms, dtype=float) @ P.T
    p = np.asarray(weights, dtype=float)
    lifted_slack = P @ np.asarray(slack, dtype=float) @ P.conj().T
    mixture = (W.T * p) @ W.conj()
    m, n = schmidt.dims
    # largest overlap of b with a Schmidt-rank-k unit vector: top-k singular values
    sb = np.linalg.svd(b.reshape(m, n), compute_uv=False)
    objective = abs(np.vdot(b, v)) ** 2 - 1
    checks = {
        "dual_objective": float(abs(objective - value)),
        "dual_feasibility": float(max(np.sum(sb[:k] ** 2) - 1, 0.0)),
        "reconstruction": float(np.max(np.abs(np.outer(v, v.conj()) + lifted_slack - mixture))),
        "primal_trace": float(abs(np.trace(lifted_slack).real - value)),
    }
    return b, W, p, lifted_slack, checks


def lift_certificates(schmidt: SchmidtData, coherence_cert: Certificate) -> EntanglementCertificate:
    r'''Carry a coherence certificate on the Schmidt vector into the product space.

    Coordinates of the certificate are canonical (sorted) indices; they are
    mapped back to Schmidt indices through the certificate's permutation.

    Parameters:
        schmidt (SchmidtData): decomposition of the state
        coherence_cert (Certificate): certificate for the Schmidt coefficient vector

    Returns:
        certificate (EntanglementCertificate)
    '''
    state = coherence_cert.state
    if state.dim != schmidt.rank:
        raise ValidationError(
            f"certificate has dimension {state.dim}, Schmidt rank is {schmidt.rank}")
    if not np.allclose(state.reconstruct(), schmidt.coefficients, rtol=0, atol=1e-8):
        raise ValidationError("certificate was not built on this state's Schmidt coefficients")
    perm = state.permutation
    r = schmidt.rank

    def to_schmidt(x):
        out = np.zeros(x.shape[:-1] + (r,))
        out[..., perm] = np.asarray(x, dtype=float)
        return out

    a = to_schmidt(coherence_cert.dual.factor())
    atoms = to_schmidt(coherence_cert.primal.atoms)
    slack = np.zeros((r, r))
    slack[np.ix_(perm, perm)] = np.asarray(coherence_cert.primal.slack, dtype=float)
    value = float(coherence_cert.value.value)
    b, W, p, lifted_slack, checks = _lift(schmidt, a, atoms, coherence_cert.primal.weights,
                                          slack, value, coherence_cert.k)
    return EntanglementCertificate(value=value, gamma_norm=value + 1, k=coherence_cert.k,
                                   dual_vector_b=b, lifted_atoms=W, weights=p,
                                   lifted_slack=lifted_slack, coherence=coherence_cert, checks=checks)


def entanglement_robustness(schmidt: SchmidtData, k: int, tolerance: float = DEFAULT_TOLERANCE,
                            lp_config: LpConfig | None = None) -> EntanglementCertificate:
    r'''Robustness of Schmidt-rank-k entanglement with product-space certificates.

    ``k = 1`` uses the closed formula ``(sum lambda)**2 - 1`` directly (the
    coherence-side standard robustness is undefined there); its certificates
    come from the ``k = 1`` mixture and certify the generalized robustness.
    For ``k >= r`` the value is 0 and the state certifies itself.

    Parameters:
        schmidt (SchmidtData): decomposition of the state
        k (int): ``1 <= k <= min(m, n)``
        tolerance (float): threshold for the coherence certificate checks

    Returns:
        certificate (EntanglementCertificate)
    '''
    k = check_k(k, min(schmidt.dims), lowest=1)
    lam = schmidt.coefficients
    r = schmidt.rank
    if k >= r:
        slack = np.zeros((r, r))
        b, W, p, lifted_slack, checks = _lift(schmidt, lam, lam[None, :], np.ones(1), slack, 0.0, k)
        return EntanglementCertificate(value=0.0, gamma_norm=1.0, k=k, dual_vector_b=b,
                                       lifted_atoms=W, weights=p, lifted_slack=lifted_slack,
                                       coherence=None, checks=checks)
    state = canonicalize(lam)
    if k == 1:
        value = float(np.sum(lam) ** 2 - 1)
        cert = certify_branch(state, branch_for(state.entries, 1), tolerance, lp_config)
        lifted = lift_certificates(schmidt, cert)
        checks = dict(lifted.checks, formula_vs_certificate=abs(value - lifted.value))
        return EntanglementCertificate(value=value, gamma_norm=value + 1, k=1,
                                       dual_vector_b=lifted.dual_vector_b,
                                       lifted_atoms=lifted.lifted_atoms, weights=lifted.weights,
                                       lifted_slack=lifted.lifted_slack, coherence=cert, checks=checks)
    return lift_certificates(schmidt, certify(state, k, tolerance, lp_config))
