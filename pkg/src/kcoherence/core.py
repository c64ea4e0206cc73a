"""Canonical form of pure states and the branch quantities of the closed form.

Every other module works on a :class:`CanonicalState`: the moduli of the
input amplitudes sorted non-increasingly. Robustness values are invariant
under the diagonal unitary and permutation that produce it, so nothing is
lost; the record of both is kept so that certificates can be mapped back.

Two number types are supported. The default is double precision. With
``exact=True`` the entries are :class:`fractions.Fraction` objects held in
numpy object arrays, and every quantity that is rational in the entries
stays rational downstream.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
import numbers

import numpy as np

from .errors import ValidationError

DEFAULT_NORM_TOLERANCE = 1e-9
EXACT_MAX_DIM = 8


def _freeze(arr):
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def is_exact(arr) -> bool:
    return np.asarray(arr).dtype == object


@dataclass(frozen=True)
class CanonicalState:
    r'''A pure state reduced to sorted, non-negative real amplitudes.

    Attributes:
        entries (np.ndarray): moduli sorted non-increasing, unit Euclidean norm
        permutation (np.ndarray): ``entries[i] == abs(raw[permutation[i]])`` (after renormalization)
        phases (np.ndarray): unit-modulus factor removed from each raw entry, in raw order
        input_norm (float): Euclidean norm of the raw input before renormalization
        norm_tolerance (float): tolerance used for the unit-norm check
    '''
    entries: np.ndarray
    permutation: np.ndarray
    phases: np.ndarray
    input_norm: float
    norm_tolerance: float = DEFAULT_NORM_TOLERANCE

    @property
    def dim(self) -> int:
        return len(self.entries)

    @property
    def exact(self) -> bool:
        return is_exact(self.entries)

    def reconstruct(self):
        """Undo sorting and phase removal, returning the raw input vector."""
        out = np.empty(self.dim, dtype=self.phases.dtype)
        out[self.permutation] = self.entries
        return out * self.phases * self.input_norm

    def support_size(self) -> int:
        return int(np.count_nonzero(self.entries != 0))


@dataclass(frozen=True)
class BranchData:
    r'''Branch index and tail sums selecting the closed-form formula.

    Attributes:
        k (int): coherence level
        ell (int): branch index, the largest ``l`` in ``2..k`` with
            ``v[l-1] >= s[l] / (k - l + 1)`` (1-based), or 1 when none qualifies
        tail_sums (np.ndarray): ``tail_sums[j-1] = sum(v[j-1:])``
        alpha (float): ``s_ell / (k - ell + 1)``
        beta_sq (float): ``alpha * s_ell + sum(v[:ell-1]**2)``
    '''
    k: int
    ell: int
    tail_sums: np.ndarray
    alpha: object
    beta_sq: object

    @property
    def s_ell(self):
        return self.tail_sums[self.ell - 1]

    @property
    def tail_width(self) -> int:
        """Number of free slots ``k - ell + 1`` in each atom's tail."""
        return self.k - self.ell + 1


def _parse_exact(x):
    if isinstance(x, (Fraction, numbers.Integral)):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, numbers.Complex) and not isinstance(x, numbers.Real):
        if x.imag != 0:
            raise ValidationError("exact mode only accepts real rational amplitudes")
        x = x.real
    if isinstance(x, numbers.Real):
        return Fraction(x)
    raise ValidationError(f"cannot read {x!r} as a rational number")


def canonicalize(raw, norm_tolerance: float = DEFAULT_NORM_TOLERANCE,
                 exact: bool = False) -> CanonicalState:
    r'''Sort moduli of a pure-state vector and record the removed phases and order.

    Parameters:
        raw (array_like): amplitudes, real or complex (rational in exact mode)
        norm_tolerance (float): allowed deviation of the Euclidean norm from 1;
            inputs within tolerance are rescaled to unit norm
        exact (bool): use ``Fraction`` arithmetic; requires real rational
            amplitudes whose squares sum to exactly 1 and at most 8 entries

    Returns:
        state (CanonicalState)
    '''
    if exact:
        values = [_parse_exact(x) for x in np.ravel(np.asarray(raw, dtype=object))]
        if len(values) == 0:
            raise ValidationError("state vector is empty")
        if len(values) > EXACT_MAX_DIM:
            raise ValidationError(f"exact mode supports at most {EXACT_MAX_DIM} entries, got {len(values)}")
        norm_sq = sum(x * x for x in values)
        if norm_sq != 1:
            raise ValidationError(f"exact mode needs a unit vector, squared norm is {norm_sq}")
        arr = np.array(values, dtype=object)
        moduli = np.array([abs(x) for x in values], dtype=object)
        phases = np.array([Fraction(-1) if x < 0 else Fraction(1) for x in values], dtype=object)
        # python's sort is stable, so equal moduli keep their input order
        order = np.array(sorted(range(len(values)), key=lambda i: -moduli[i]), dtype=np.intp)
        return CanonicalState(_freeze(moduli[order]), _freeze(order), _freeze(phases),
                              1, norm_tolerance)

    arr = np.asarray(raw)
    if arr.dtype == object:
        arr = arr.astype(complex)
    arr = np.ravel(arr)
    if arr.size == 0:
        raise ValidationError("state vector is empty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("state vector contains non-finite entries")
    norm = float(np.linalg.norm(arr))
    if abs(norm - 1) > norm_tolerance:
        raise ValidationError(
            f"state vector has norm {norm!r}, outside {norm_tolerance:g} of 1 (not a pure state)")
    if np.iscomplexobj(arr):
        moduli = np.abs(arr)
        phases = np.ones(arr.shape, dtype=complex)
        nz = moduli > 0
        phases[nz] = arr[nz] / moduli[nz]
    else:
        arr = arr.astype(float)
        moduli = np.abs(arr)
        phases = np.where(arr < 0, -1.0, 1.0)
    # skip rescaling when the norm is already 1 to a few ulps, so that
    # canonicalizing a canonical state returns it bit for bit
    if abs(norm - 1) > 4 * np.finfo(float).eps:
        moduli = moduli / norm
    order = np.argsort(-moduli, kind="stable")
    return CanonicalState(_freeze(moduli[order]), _freeze(order), _freeze(phases),
                          norm, norm_tolerance)


def tail_sums(entries):
    """Return ``s_j = sum(entries[j-1:])`` for every ``j`` via one backward pass."""
    # accumulating from the small end keeps the partial sums accurate
    return np.cumsum(entries[::-1])[::-1]


def branch_for(entries, k: int, ell: int | None = None) -> BranchData:
    r'''Branch quantities for sorted non-negative ``entries`` and any ``1 <= k <= n``.

    ``ell`` may be forced to another admissible value (used to compare the
    constructions on both sides of a branch boundary); by default it is the
    maximal index satisfying the branch inequality.
    '''
    tails = tail_sums(entries)
    if ell is None:
        ell = 1
        for cand in range(k, 1, -1):
            if entries[cand - 2] >= tails[cand - 1] / (k - cand + 1):
                ell = cand
                break
    alpha = tails[ell - 1] / (k - ell + 1)
    head = entries[:ell - 1]
    beta_sq = alpha * tails[ell - 1] + sum(head * head)
    return BranchData(k=k, ell=ell, tail_sums=_freeze(tails), alpha=alpha, beta_sq=beta_sq)


def check_k(k, n: int, lowest: int = 2):
    if isinstance(k, bool) or not isinstance(k, numbers.Integral):
        raise ValidationError(f"k must be an integer, got {k!r}")
    if not lowest <= k <= n:
        raise ValidationError(f"k={k} out of range {lowest}..{n}")
    return int(k)


def select_branch(state: CanonicalState, k: int) -> BranchData:
    r'''Pick the branch index ``ell`` for coherence level ``k``.

    Ties at equality resolve to the larger index since the defining
    inequality is non-strict.

    Parameters:
        state (CanonicalState): canonical unit state of dimension ``n``
        k (int): coherence level, ``2 <= k <= n``

    Returns:
        branch (BranchData)
    '''
    k = check_k(k, state.dim)
    return branch_for(state.entries, k)


def boundary_margin(entries, k: int) -> float:
    """Smallest gap ``|v[l-1] - s[l]/(k-l+1)|`` over candidate indices ``l``.

    A value near zero means the state sits close to a branch switch.
    """
    tails = tail_sums(entries)
    gaps = [abs(float(entries[c - 2] - tails[c - 1] / (k - c + 1))) for c in range(2, k + 1)]
    return min(gaps) if gaps else float("inf")
