"""Explicit dual feasible points certifying the robustness lower bound.

A matrix ``W`` certifies ``R >= tr(vv^t W) - 1`` when ``W`` is positive
semidefinite and ``I - W`` lies in the dual cone of the k-incoherent states,
i.e. every k x k principal submatrix of ``W`` has largest eigenvalue at most 1.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import itertools
from math import comb

import numpy as np

from .closed_form import value_for
from .core import BranchData, CanonicalState, _freeze, is_exact
from .errors import ValidationError

DEFAULT_TOLERANCE = 1e-8
ENUMERATION_MAX_DIM = 20
_CHUNK = 4096


@dataclass(frozen=True)
class DualWitness:
    r'''Feasible point of the dual program.

    Attributes:
        kind (str): ``"rank_one"`` (``W = a a^t``) or ``"all_ones"`` (``W = J_n / k``)
        a (np.ndarray | None): factor of ``W`` for rank-one witnesses
        matrix (np.ndarray): the n x n witness ``W`` (rational in exact mode)
        objective: ``tr(vv^t W) - 1``
        k (int): coherence level
    '''
    kind: str
    a: np.ndarray | None
    matrix: np.ndarray
    objective: object
    k: int

    def factor(self) -> np.ndarray:
        """A real vector ``f`` with ``W = f f^t`` (``ones / sqrt(k)`` for all-ones)."""
        if self.a is not None:
            return np.asarray(self.a, dtype=float)
        n = self.matrix.shape[0]
        return np.full(n, 1 / np.sqrt(self.k))


@dataclass(frozen=True)
class DualReport:
    feasible: bool
    max_submatrix_eig: float
    min_eig: float
    objective: float
    objective_gap: float
    method: str

    @property
    def margin(self) -> float:
        """How far the witness is outside the feasible set (0 when inside)."""
        return max(self.max_submatrix_eig - 1.0, -self.min_eig, 0.0)


def build_dual_witness(state: CanonicalState, branch: BranchData) -> DualWitness:
    r'''Dual witness attaining the closed-form value.

    For ``ell >= 2`` the witness is ``a a^t`` with
    ``a = (v_1, ..., v_{ell-1}, alpha, ..., alpha) / beta``; for ``ell = 1`` it is
    the scaled all-ones matrix ``J_n / k``.

    Parameters:
        state (CanonicalState): canonical unit state
        branch (BranchData): branch data of ``state`` for the target ``k``

    Returns:
        witness (DualWitness)
    '''
    v = state.entries
    n, k = state.dim, branch.k
    if len(branch.tail_sums) != n:
        raise ValidationError("branch was computed for a different dimension")
    exact = is_exact(v)
    if branch.ell == 1:
        W = np.full((n, n), Fraction(1, k), dtype=object) if exact else np.full((n, n), 1.0 / k)
        objective = branch.tail_sums[0] ** 2 / k - 1
        return DualWitness("all_ones", None, _freeze(W), objective, k)

    ell = branch.ell
    y = np.concatenate([v[:ell - 1], np.full(n - ell + 1, branch.alpha, dtype=v.dtype)])
    if exact:
        W = np.outer(y, y) / branch.beta_sq
        a = y.astype(float) / np.sqrt(float(branch.beta_sq))
    else:
        a = y / np.sqrt(branch.beta_sq)
        W = np.outer(a, a)
    objective = (v @ y) ** 2 / branch.beta_sq - 1
    return DualWitness("rank_one", _freeze(a), _freeze(W), objective, k)


def _is_rank_one_psd(W, tol) -> bool:
    d = np.diag(W)
    if is_exact(W):
        return all(x >= 0 for x in d) and bool(np.all(np.outer(d, d) == W * W))
    return bool(np.all(d >= -tol) and np.max(np.abs(np.outer(d, d) - W * W)) <= tol)


def max_principal_submatrix_eig(W, k: int) -> float:
    """Largest eigenvalue over all k x k principal submatrices, by enumeration."""
    W = np.asarray(W, dtype=float)
    n = W.shape[0]
    if n > ENUMERATION_MAX_DIM:
        raise ValidationError(
            f"principal-submatrix enumeration is capped at n <= {ENUMERATION_MAX_DIM} (n={n})")
    best = -np.inf
    subsets = itertools.combinations(range(n), k)
    for _ in range(0, comb(n, k), _CHUNK):
        idx = np.array(list(itertools.islice(subsets, _CHUNK)))
        blocks = W[idx[:, :, None], idx[:, None, :]]
        best = max(best, float(np.linalg.eigvalsh(blocks)[:, -1].max()))
    return best


def verify_dual_witness(witness: DualWitness, state: CanonicalState,
                        tolerance: float = DEFAULT_TOLERANCE) -> DualReport:
    r'''Check dual feasibility of a witness and compare its objective with the closed form.

    Rank-one PSD matrices are checked through their diagonal (the largest
    eigenvalue of a rank-one principal block is its trace); other matrices by
    enumerating all principal submatrices (``n <= 20``). The witness is only read.

    Parameters:
        witness (DualWitness): witness to check
        state (CanonicalState): state the witness claims to certify
        tolerance (float): feasibility tolerance

    Returns:
        report (DualReport)
    '''
    W = witness.matrix
    n, k = state.dim, witness.k
    if W.shape != (n, n):
        raise ValidationError(f"witness is {W.shape}, state has dimension {n}")
    Wf = np.asarray(W, dtype=float)
    if not np.allclose(Wf, Wf.T, rtol=0, atol=tolerance):
        return DualReport(False, np.inf, -np.inf, np.nan, np.inf, "asymmetric")
    min_eig = float(np.linalg.eigvalsh(Wf).min())
    if _is_rank_one_psd(W, tolerance):
        top = sum(sorted(np.diag(W), reverse=True)[:k])
        method = "rank_one"
    else:
        top = max_principal_submatrix_eig(Wf, k)
        method = "enumeration"

    v = state.entries
    objective = v @ W @ v - 1
    gap = abs(objective - value_for(v, k))
    if is_exact(W) and method == "rank_one":
        # an exactly rank-one PSD matrix has no negative eigenvalue
        min_eig = 0.0
        feasible = top <= 1
    else:
        feasible = min_eig >= -tolerance and top <= 1 + tolerance
    return DualReport(bool(feasible), float(top), min_eig, float(objective), float(gap), method)
