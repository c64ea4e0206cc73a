"""Phase-1 simplex for feasibility linear programs.

Dense tableau with Bland's rule. Works over floats, or over ``Fraction``
when the problem data are rational (numpy object arrays), in which case all
comparisons are exact and the tolerance is ignored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import IterationLimitError, ValidationError

DEFAULT_TOLERANCE = 1e-9
DEFAULT_MAX_ITER = 10**6
# smallest magnitude accepted as a pivot element in float mode
PIVOT_EPS = 1e-12


@dataclass
class LpProblem:
    r'''Find ``p >= 0`` with ``A_eq p = b_eq`` and ``A_ineq p <= b_ineq``.

    Attributes:
        num_vars (int): number of variables
        equalities (list): ``(row, rhs)`` pairs
        inequalities (list): ``(row, rhs)`` pairs, meaning ``row . p <= rhs``
    '''
    num_vars: int
    equalities: list = field(default_factory=list)
    inequalities: list = field(default_factory=list)

    def __post_init__(self):
        for row, _ in self.equalities + self.inequalities:
            if len(row) != self.num_vars:
                raise ValidationError(f"constraint row of length {len(row)}, expected {self.num_vars}")

    def _matrix(self, pairs, exact):
        dtype = object if exact else float
        if not pairs:
            return np.zeros((0, self.num_vars), dtype=dtype), np.zeros(0, dtype=dtype)
        conv = Fraction if exact else float
        A = np.array([[conv(c) for c in r] for r, _ in pairs], dtype=dtype)
        b = np.array([conv(rhs) for _, rhs in pairs], dtype=dtype)
        if not exact and not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValidationError("constraint data must be finite")
        return A, b

    @property
    def exact(self) -> bool:
        """True when every coefficient is an int or Fraction."""
        def rational(x):
            return isinstance(x, (int, Fraction)) and not isinstance(x, bool)
        return all(rational(c) for r, rhs in self.equalities + self.inequalities
                   for c in list(r) + [rhs])

    def arrays(self, exact=None):
        exact = self.exact if exact is None else exact
        A_eq, b_eq = self._matrix(self.equalities, exact)
        A_in, b_in = self._matrix(self.inequalities, exact)
        return A_eq, b_eq, A_in, b_in

    def residual(self, point) -> float:
        """Largest constraint violation of ``point``, computed from the raw data."""
        exact = self.exact and np.asarray(point).dtype == object
        A_eq, b_eq, A_in, b_in = self.arrays(exact)
        p = np.asarray(point, dtype=object if exact else float)
        worst = max(0, -min(p)) if len(p) else 0
        if len(b_eq):
            worst = max(worst, max(abs(x) for x in A_eq @ p - b_eq))
        if len(b_in):
            worst = max(worst, max(A_in @ p - b_in))
        return worst if exact else float(worst)


@dataclass(frozen=True)
class FeasibilityResult:
    r'''Outcome of :func:`solve_feasibility`.

    Attributes:
        status (str): ``"feasible"``; ``"infeasible"`` when the phase-1 optimum
            exceeds the tolerance; ``"inaccurate"`` when phase 1 succeeded but the
            re-checked point violates a constraint by more than the tolerance
        point (np.ndarray | None): the point found (clipped to ``p >= 0``)
        residual: largest constraint violation of ``point``, or the phase-1
            optimum (total artificial infeasibility) when infeasible
        iterations (int): pivots performed
    '''
    status: str
    point: np.ndarray | None
    residual: object
    iterations: int

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _pivot(T, row, col):
    T[row] = T[row] / T[row, col]
    factors = T[:, col].copy()
    factors[row] = 0
    T -= np.outer(factors, T[row])


def solve_feasibility(problem: LpProblem, tolerance: float = DEFAULT_TOLERANCE,
                      max_iter: int = DEFAULT_MAX_ITER) -> FeasibilityResult:
    r'''Search for a feasible point with phase-1 simplex and Bland's rule.

    Parameters:
        problem (LpProblem): constraints; rational data switch to exact arithmetic
        tolerance (float): infeasibility threshold on the phase-1 optimum and on the
            independently re-checked residual (unused in exact mode)
        max_iter (int): pivot cap; exceeding it raises ``IterationLimitError``

    Returns:
        result (FeasibilityResult)
    '''
    exact = problem.exact
    A_eq, b_eq, A_in, b_in = problem.arrays(exact)
    n = problem.num_vars
    n_eq, n_in = len(b_eq), len(b_in)
    m = n_eq + n_in
    zero = Fraction(0) if exact else 0.0
    eps = 0 if exact else PIVOT_EPS

    # rows: equalities, then inequalities with one slack each; negate rows with
    # negative rhs and give every row lacking a usable slack an artificial
    rows = np.zeros((m, n + n_in), dtype=object if exact else float)
    rows[:, :] = zero
    rhs = np.concatenate([b_eq, b_in]) if m else np.zeros(0)
    rows[:n_eq, :n] = A_eq
    rows[n_eq:, :n] = A_in
    for i in range(n_in):
        rows[n_eq + i, n + i] = Fraction(1) if exact else 1.0
    basis = [-1] * m
    needs_art = []
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = -rows[i]
            rhs[i] = -rhs[i]
        if i >= n_eq and rows[i, n + i - n_eq] > 0:
            basis[i] = n + i - n_eq
        else:
            needs_art.append(i)
    n_art = len(needs_art)
    width = n + n_in + n_art
    T = np.zeros((m + 1, width + 1), dtype=rows.dtype)
    T[:, :] = zero
    T[:m, :n + n_in] = rows
    T[:m, -1] = rhs
    for j, i in enumerate(needs_art):
        T[i, n + n_in + j] = Fraction(1) if exact else 1.0
        basis[i] = n + n_in + j
        T[m] -= T[i]
    T[m, n + n_in:width] = zero

    iterations = 0
    while True:
        candidates = np.flatnonzero((T[m, :width] < -eps).astype(bool))
        if candidates.size == 0:
            break
        if iterations >= max_iter:
            raise IterationLimitError(f"simplex exceeded {max_iter} pivots")
        entering = int(candidates[0])
        column = T[:m, entering]
        rows_ok = np.flatnonzero((column > eps).astype(bool))
        if rows_ok.size == 0:
            # phase-1 objective is bounded below by zero, so this is numerical trouble
            raise IterationLimitError("unbounded direction in phase 1 (ill-conditioned data)")
        ratios = T[rows_ok, -1] / column[rows_ok]
        best = ratios.min()
        tied = rows_ok[(ratios == best).astype(bool)]
        leave = int(min(tied, key=lambda i: basis[i]))
        _pivot(T, leave, entering)
        basis[leave] = entering
        iterations += 1

    infeasibility = -T[m, -1]
    if not exact:
        infeasibility = float(infeasibility)
    if infeasibility > (0 if exact else tolerance):
        return FeasibilityResult("infeasible", None, infeasibility, iterations)

    point = np.zeros(n, dtype=T.dtype)
    point[:] = zero
    for i, var in enumerate(basis):
        if var < n:
            point[var] = T[i, -1]
    if not exact:
        point = np.maximum(point.astype(float), 0.0)
    residual = problem.residual(point)
    if residual > (0 if exact else tolerance):
        return FeasibilityResult("inaccurate", point, residual, iterations)
    return FeasibilityResult("feasible", point, residual, iterations)
