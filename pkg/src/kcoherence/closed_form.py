"""Closed-form robustness of k-coherence for pure states and the k-support norms."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (BranchData, CanonicalState, branch_for, canonicalize, check_k, is_exact,
                   select_branch)
from .errors import ValidationError


@dataclass(frozen=True)
class RobustnessValue:
    r'''Common value of the standard and generalized robustness of a pure state.

    Attributes:
        value: robustness, ``beta_sq - 1``
        branch (BranchData): branch quantities the value was computed from
        k_support_norm_sq: squared k-support norm of the state, ``value + 1``
    '''
    value: object
    branch: BranchData
    k_support_norm_sq: object

    def __float__(self):
        return float(self.value)


def _value_from_branch(entries, branch: BranchData):
    ell = branch.ell
    s_ell = branch.tail_sums[ell - 1]
    tail = entries[ell - 1:]
    value = s_ell * s_ell / (branch.k - ell + 1) - sum(tail * tail)
    if not is_exact(entries):
        # the formula is a difference of nearly equal terms for almost-incoherent
        # states; rounding must not produce a negative robustness
        value = max(float(value), 0.0)
    return value


def value_for(entries, k: int):
    """Closed-form value for sorted unit ``entries`` and any ``1 <= k <= n``.

    At ``k = 1`` this is ``(sum v)**2 - 1``, the generalized robustness of coherence.
    """
    return _value_from_branch(entries, branch_for(entries, k))


def robustness_value(state: CanonicalState, k: int) -> RobustnessValue:
    r'''Robustness of k-coherence of a pure state.

    The standard and generalized robustness coincide on pure states and equal
    ``s_l**2 / (k - l + 1) - sum(v[l-1:]**2)`` with ``l`` the branch index.

    Parameters:
        state (CanonicalState): canonical unit state
        k (int): coherence level, ``2 <= k <= n``

    Returns:
        result (RobustnessValue)
    '''
    branch = select_branch(state, k)
    value = _value_from_branch(state.entries, branch)
    return RobustnessValue(value=value, branch=branch, k_support_norm_sq=value + 1)


def _as_vector(x):
    arr = np.ravel(np.asarray(x))
    if arr.dtype == object:
        arr = arr.astype(complex)
    if arr.size == 0:
        raise ValidationError("vector is empty")
    return arr


def k_support_norm(x, k: int) -> float:
    r'''k-support norm, interpolating between l1 (``k=1``) and l2 (``k=n``).

    For a unit vector the square equals the robustness plus one; other vectors
    are handled by absolute homogeneity.

    Parameters:
        x (array_like): real or complex vector
        k (int): ``1 <= k <= len(x)``

    Returns:
        norm (float)
    '''
    arr = _as_vector(x)
    k = check_k(k, arr.size, lowest=1)
    peak = float(np.max(np.abs(arr)))
    if peak == 0:
        return 0.0
    # divide by the largest modulus first so tiny or huge inputs neither
    # underflow nor overflow when squared
    arr = arr / peak
    unit = float(np.linalg.norm(arr))
    scale = peak * unit
    state = canonicalize(arr / unit, norm_tolerance=1e-6)
    branch = branch_for(state.entries, k)
    return scale * float(np.sqrt(_value_from_branch(state.entries, branch) + 1))


def k_support_dual_norm(x, k: int) -> float:
    r'''Dual of the k-support norm: l2 norm of the ``k`` largest-modulus entries.'''
    arr = _as_vector(x)
    k = check_k(k, arr.size, lowest=1)
    top = np.sort(np.abs(arr))[::-1][:k]
    peak = float(top[0])
    if peak == 0:
        return 0.0
    return peak * float(np.linalg.norm(top / peak))
