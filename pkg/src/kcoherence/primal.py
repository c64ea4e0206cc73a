"""Primal certificates: explicit mixtures realizing the robustness upper bound.

For a canonical state ``v`` with robustness ``s`` we build a slack matrix
``S = s * sigma`` and a probability vector ``p`` over atoms ``x`` (each with at
most ``k`` non-zero entries) such that

    vv^t + S = sum_x p_x x x^t,

so ``(vv^t + s sigma) / (1 + s)`` is k-incoherent. ``S`` has non-negative
diagonal, non-positive off-diagonal and zero row sums on its active block,
which makes it a non-negative combination of 2-incoherent matrices
(:func:`decompose_into_I2`), hence ``sigma`` is k-incoherent as well.

Every atom has squared norm ``1 + s`` and reads
``(v_1, ..., v_{ell-1}) + (alpha on k - ell + 1 of the remaining slots)``.
For ``ell = k`` the mixture is explicit; otherwise the weights come from a
feasibility linear program over all placements of the tail entries.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import itertools
from math import comb

import numpy as np

from .closed_form import RobustnessValue, _value_from_branch
from .core import BranchData, CanonicalState, _freeze, boundary_margin, branch_for, check_k, is_exact
from .dual import DualReport, DualWitness, build_dual_witness, verify_dual_witness
from .errors import CertificationError, LpInfeasibleError, ValidationError
from .lp import LpProblem, solve_feasibility

DEFAULT_TOLERANCE = 1e-8
NEAR_BOUNDARY = 1e-9


@dataclass(frozen=True)
class LpConfig:
    r'''Settings for the mixture linear program.

    Attributes:
        tolerance (float): feasibility tolerance handed to the simplex solver
        max_iter (int): simplex pivot cap
        max_atoms (int): refuse programs with more candidate atoms than this
        prune_below (float): drop weights below this value and renormalize
    '''
    tolerance: float = 1e-9
    max_iter: int = 10**6
    max_atoms: int = 200_000
    prune_below: float = 1e-12


@dataclass(frozen=True)
class I2Decomposition:
    r'''Split of a matrix into 2 x 2-supported PSD parts plus a diagonal.

    Attributes:
        pair_parts (dict): ``(i, j) -> 2x2 block [[|s_ij|, s_ij], [s_ij, |s_ij|]]``
            living on rows/columns ``i, j``; only non-zero ``s_ij`` are stored
        diagonal_part (np.ndarray): diagonal of ``D``
    '''
    pair_parts: dict
    diagonal_part: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.diagonal_part)

    def embed(self, pair) -> np.ndarray:
        """The part for ``pair`` as a full n x n matrix."""
        i, j = pair
        block = self.pair_parts[pair]
        out = np.zeros((self.dim, self.dim), dtype=block.dtype)
        out[np.ix_([i, j], [i, j])] = block
        return out

    def reconstruct(self) -> np.ndarray:
        out = np.diag(self.diagonal_part)
        for (i, j), block in self.pair_parts.items():
            out[np.ix_([i, j], [i, j])] += block
        return out


def decompose_into_I2(S, tolerance: float = 0.0) -> I2Decomposition:
    r'''Write a diagonally dominant Z-matrix as a sum of 2-incoherent PSD parts.

    Each off-diagonal entry ``s_ij`` contributes the PSD part
    ``[[|s_ij|, s_ij], [s_ij, |s_ij|]]`` on indices ``i, j``; what remains on the
    diagonal equals the row sums and must be non-negative.

    Parameters:
        S (array_like): real symmetric matrix with non-negative diagonal,
            non-positive off-diagonal entries and non-negative row sums
        tolerance (float): slack allowed when checking those sign conditions

    Returns:
        decomposition (I2Decomposition)
    '''
    S = np.asarray(S)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {S.shape}")
    n = S.shape[0]
    exact = is_exact(S)
    tol = 0 if exact else tolerance
    for i in range(n):
        if S[i, i] < -tol:
            raise ValidationError(f"negative diagonal entry at ({i}, {i}): {S[i, i]}")
        for j in range(i + 1, n):
            if S[i, j] != S[j, i] and (exact or abs(S[i, j] - S[j, i]) > tol):
                raise ValidationError(f"matrix is not symmetric at ({i}, {j})")
            if S[i, j] > tol:
                raise ValidationError(f"positive off-diagonal entry at ({i}, {j}): {S[i, j]}")
    parts = {}
    diag = np.array([S[i, i] for i in range(n)], dtype=S.dtype)
    for i in range(n):
        for j in range(i + 1, n):
            s = S[i, j]
            if s != 0:
                mag = abs(s)
                parts[(i, j)] = np.array([[mag, s], [s, mag]], dtype=S.dtype)
                diag[i] = diag[i] - mag
                diag[j] = diag[j] - mag
    for i in range(n):
        if diag[i] < -tol:
            raise ValidationError(f"negative row sum at row {i}: {diag[i]}")
    return I2Decomposition(parts, _freeze(diag))


@dataclass(frozen=True)
class PrimalDecomposition:
    r'''Explicit upper-bound certificate.

    Attributes:
        s: trace of the slack, i.e. the certified robustness upper bound
        ell (int): branch index the construction used
        k (int): coherence level
        slack (np.ndarray): ``O_{ell-1} (+) S`` with ``S`` a zero-row-sum Z-matrix
        atoms (np.ndarray): one atom per row, at most ``k`` non-zeros each
        weights (np.ndarray): probability vector over the atoms
        sigma_parts (I2Decomposition | None): 2-incoherent split of the slack, None when
            the slack misses the sign pattern by more than the tolerance
    '''
    s: object
    ell: int
    k: int
    slack: np.ndarray
    atoms: np.ndarray
    weights: np.ndarray
    sigma_parts: I2Decomposition

    def mixture(self) -> np.ndarray:
        """``sum_x p_x x x^t``."""
        return (self.atoms.T * self.weights) @ self.atoms

    def reconstruction_residual(self, state: CanonicalState) -> float:
        v = state.entries
        diff = np.outer(v, v) + self.slack - self.mixture()
        return float(np.max(np.abs(diff.astype(float)))) if diff.size else 0.0

    def max_atom_support(self) -> int:
        return int(np.max(np.count_nonzero(self.atoms != 0, axis=1))) if len(self.atoms) else 0


def slack_violation(slack, ell: int) -> float:
    """Largest departure of ``slack`` from the ``O_{ell-1} (+) S`` pattern with ``S``
    a symmetric zero-row-sum matrix with non-positive off-diagonal entries."""
    slack = np.asarray(slack)
    n = slack.shape[0]
    h = ell - 1
    worst = float(np.max(np.abs(slack - slack.T))) if n else 0.0
    if h:
        worst = max(worst, float(np.max(np.abs(slack[:h, :]))))
    block = slack[h:, h:]
    if block.size:
        off = block - np.diag(np.diag(block))
        worst = max(worst, float(np.max(off)), float(-np.min(np.diag(block))),
                    float(np.max(np.abs(block.sum(axis=1)))))
    return max(worst, 0.0)


def _finish(state, branch, slack, atoms, weights, tolerance):
    try:
        parts = decompose_into_I2(slack, tolerance)
    except ValidationError:
        # reported through the slack_structure gap rather than raised here
        parts = None
    s = np.trace(slack)
    if not is_exact(slack):
        s = float(s)
    return PrimalDecomposition(s=s, ell=branch.ell, k=branch.k, slack=_freeze(slack),
                               atoms=_freeze(atoms), weights=_freeze(weights), sigma_parts=parts)


def _zeros(shape, like):
    out = np.zeros(shape, dtype=like.dtype)
    if like.dtype == object:
        out[...] = 0
    return out


def _trivial(state, branch, tolerance):
    v = state.entries
    n = state.dim
    ones = np.ones(1, dtype=v.dtype)
    return _finish(state, branch, _zeros((n, n), v), np.array([v]), ones, tolerance)


def build_primal_ell_eq_k(state: CanonicalState, branch: BranchData,
                          tolerance: float = DEFAULT_TOLERANCE) -> PrimalDecomposition:
    r'''Explicit mixture for the ``ell = k`` branch.

    With ``u_j = sqrt(v_j / s_k) (v_1, ..., v_{k-1}) + sqrt(s_k v_j) e_j`` for
    ``j >= k``, ``sum_j u_j u_j^t = vv^t + O_{k-1} (+) (diag(v_j s_k) - v_i v_j)``.
    Normalizing to a probability vector gives weights ``v_j / s_k`` and atoms
    ``(v_1, ..., v_{k-1}) + s_k e_j``, all rational in the entries.
    '''
    if branch.ell != branch.k:
        raise ValidationError(f"ell = k construction needs ell == k, got ell={branch.ell}, k={branch.k}")
    v = state.entries
    n, k = state.dim, branch.k
    s_k = branch.tail_sums[k - 1]
    if s_k == 0:
        return _trivial(state, branch, tolerance)
    tail = v[k - 1:]
    keep = [j for j in range(len(tail)) if tail[j] != 0]
    atoms = _zeros((len(keep), n), v)
    atoms[:, :k - 1] = v[:k - 1]
    for row, j in enumerate(keep):
        atoms[row, k - 1 + j] = s_k
    weights = np.array([tail[j] / s_k for j in keep], dtype=v.dtype)
    slack = _zeros((n, n), v)
    slack[k - 1:, k - 1:] = np.diag(tail * s_k) - np.outer(tail, tail)
    return _finish(state, branch, slack, atoms, weights, tolerance)


def _mixture_lp(tail, width: int, alpha, config: LpConfig):
    """Weights over atoms ``alpha * 1_b`` (``|b| = width``) whose first and second
    moments match ``tail`` as the zero-row-sum slack requires."""
    support = [i for i in range(len(tail)) if tail[i] > 0]
    t = tail[support]
    m = len(support)
    if m < width:
        raise CertificationError(
            f"tail has {m} non-zero entries, fewer than the {width} slots per atom")
    count = comb(m, width)
    if count > config.max_atoms:
        raise ValidationError(
            f"mixture program needs C({m},{width}) = {count} atoms, above the cap {config.max_atoms}")
    subsets = list(itertools.combinations(range(m), width))
    member = np.zeros((m, count), dtype=int)
    for col, b in enumerate(subsets):
        member[list(b), col] = 1

    # scaled by 1/alpha (first moments) and 1/alpha^2 (second moments)
    equalities = [([1] * count, 1 if is_exact(t) else 1.0)]
    equalities += [(member[i].tolist(), t[i] / alpha) for i in range(m)]
    inequalities = []
    if width > 1:
        for i in range(m):
            for j in range(i + 1, m):
                inequalities.append(((member[i] * member[j]).tolist(), t[i] * t[j] / (alpha * alpha)))
    result = solve_feasibility(LpProblem(count, equalities, inequalities),
                               tolerance=config.tolerance, max_iter=config.max_iter)
    if not result.feasible:
        raise LpInfeasibleError(
            f"mixture program {result.status} (residual {float(result.residual):.3e})", result.residual)

    p = result.point
    if is_exact(p):
        keep = [c for c in range(count) if p[c] != 0]
        weights = p[keep]
    else:
        keep = [c for c in range(count) if p[c] >= config.prune_below]
        weights = p[keep] / p[keep].sum()
    atoms = _zeros((len(keep), len(tail)), tail)
    for row, c in enumerate(keep):
        atoms[row, [support[i] for i in subsets[c]]] = alpha
    return atoms, weights


def _build_from_lp(state, branch, config, tolerance):
    v = state.entries
    n, ell = state.dim, branch.ell
    if branch.s_ell == 0:
        return _trivial(state, branch, tolerance)
    h = ell - 1
    tail = v[h:]
    tail_atoms, weights = _mixture_lp(tail, branch.tail_width, branch.alpha, config or LpConfig())
    atoms = _zeros((len(weights), n), v)
    atoms[:, :h] = v[:h]
    atoms[:, h:] = tail_atoms
    slack = _zeros((n, n), v)
    slack[h:, h:] = (tail_atoms.T * weights) @ tail_atoms - np.outer(tail, tail)
    return _finish(state, branch, slack, atoms, weights, tolerance)


def build_primal_ell_eq_1(state: CanonicalState, branch: BranchData, lp_config: LpConfig | None = None,
                          tolerance: float = DEFAULT_TOLERANCE) -> PrimalDecomposition:
    r'''Mixture for the ``ell = 1`` branch via the feasibility linear program.

    Atoms put ``s_1 / k`` on each of ``k`` coordinates; the program matches
    ``sum_b p_b x_b = v`` and keeps the off-diagonal of the slack non-positive.
    '''
    if branch.ell != 1:
        raise ValidationError(f"ell = 1 construction needs ell == 1, got {branch.ell}")
    return _build_from_lp(state, branch, lp_config, tolerance)


def build_primal_middle(state: CanonicalState, branch: BranchData, lp_config: LpConfig | None = None,
                        tolerance: float = DEFAULT_TOLERANCE) -> PrimalDecomposition:
    r'''Mixture for ``1 < ell < k``: solve the ``ell = 1`` program on the tail
    ``(v_ell, ..., v_n)`` with ``k - ell + 1`` slots of height ``s_ell / (k - ell + 1)``
    and prefix every atom with ``(v_1, ..., v_{ell-1})``.'''
    if not 1 < branch.ell < branch.k:
        raise ValidationError(f"middle construction needs 1 < ell < k, got ell={branch.ell}, k={branch.k}")
    return _build_from_lp(state, branch, lp_config, tolerance)


def build_primal(state: CanonicalState, branch: BranchData, lp_config: LpConfig | None = None,
                 tolerance: float = DEFAULT_TOLERANCE) -> PrimalDecomposition:
    """Dispatch to the construction matching ``branch.ell``."""
    if branch.ell == branch.k:
        return build_primal_ell_eq_k(state, branch, tolerance)
    if branch.ell == 1:
        return build_primal_ell_eq_1(state, branch, lp_config, tolerance)
    return build_primal_middle(state, branch, lp_config, tolerance)


@dataclass(frozen=True)
class Certificate:
    r'''Closed-form value together with matching lower and upper bound certificates.

    Attributes:
        state (CanonicalState): certified state
        k (int): coherence level
        value (RobustnessValue): closed-form value and branch data
        dual (DualWitness): lower-bound witness
        dual_report (DualReport): independent check of ``dual``
        primal (PrimalDecomposition): upper-bound mixture
        gaps (dict): named discrepancies, each to be compared with ``tolerance``
        tolerance (float): acceptance threshold for every gap
        boundary_margin (float): distance of the state from a branch switch
    '''
    state: CanonicalState
    k: int
    value: RobustnessValue
    dual: DualWitness
    dual_report: DualReport
    primal: PrimalDecomposition
    gaps: dict = field(default_factory=dict)
    tolerance: float = DEFAULT_TOLERANCE
    boundary_margin: float = float("inf")

    @property
    def certified(self) -> bool:
        return self.dual_report.feasible and all(g <= self.tolerance for g in self.gaps.values())

    @property
    def near_boundary(self) -> bool:
        return self.boundary_margin <= NEAR_BOUNDARY

    def failures(self) -> dict:
        out = {name: g for name, g in self.gaps.items() if g > self.tolerance}
        if not self.dual_report.feasible:
            out["dual_infeasible"] = self.dual_report.margin
        return out


def _gaps(state, value, dual, report, primal):
    val = value.value
    trace = primal.s
    weights = primal.weights
    return {
        "dual_objective": float(abs(dual.objective - val)),
        "primal_trace": float(abs(trace - val)),
        "dual_primal": float(abs(dual.objective - trace)),
        "reconstruction": primal.reconstruction_residual(state),
        "dual_feasibility": report.margin,
        "slack_structure": slack_violation(primal.slack, primal.ell),
        "weights": float(max(abs(sum(weights) - 1), -min(weights), 0)),
        "atom_support": float(max(primal.max_atom_support() - primal.k, 0)),
    }


def certify_branch(state: CanonicalState, branch: BranchData, tolerance: float = DEFAULT_TOLERANCE,
                   lp_config: LpConfig | None = None) -> Certificate:
    """Certificate for a given (possibly forced) branch; does not raise on gaps."""
    value = _value_from_branch(state.entries, branch)
    rv = RobustnessValue(value=value, branch=branch, k_support_norm_sq=value + 1)
    dual = build_dual_witness(state, branch)
    report = verify_dual_witness(dual, state, tolerance)
    primal = build_primal(state, branch, lp_config, tolerance)
    return Certificate(state=state, k=branch.k, value=rv, dual=dual, dual_report=report,
                       primal=primal, gaps=_gaps(state, rv, dual, report, primal),
                       tolerance=tolerance, boundary_margin=boundary_margin(state.entries, branch.k))


def certify(state: CanonicalState, k: int, tolerance: float = DEFAULT_TOLERANCE,
            lp_config: LpConfig | None = None, raise_on_gap: bool = True) -> Certificate:
    r'''Closed-form value with dual and primal certificates that sandwich it.

    Parameters:
        state (CanonicalState): canonical unit state
        k (int): coherence level, ``2 <= k <= n``
        tolerance (float): largest acceptable gap for every check
        lp_config (LpConfig): settings for the mixture program
        raise_on_gap (bool): raise ``CertificationError`` when a check fails

    Returns:
        certificate (Certificate)
    '''
    k = check_k(k, state.dim)
    cert = certify_branch(state, branch_for(state.entries, k), tolerance, lp_config)
    if raise_on_gap and not cert.certified:
        raise CertificationError(f"certificate checks failed: {cert.failures()}", cert)
    return cert
