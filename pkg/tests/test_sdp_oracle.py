r'''Cross-checks against an independent conic solver (skipped without cvxpy).'''
import itertools

import numpy as np
import pytest

from kcoherence import canonicalize, k_support_norm, robustness_value

from conftest import random_state

cp = pytest.importorskip("cvxpy")


def generalized_robustness_dual(v, k):
    r'''max v^T W v - 1 over W >= 0 with every k x k principal block of I - W PSD.'''
    n = len(v)
    W = cp.Variable((n, n), symmetric=True)
    M = np.eye(n) - W
    cons = [W >> 0] + [M[list(b)][:, list(b)] >> 0 for b in itertools.combinations(range(n), k)]
    problem = cp.Problem(cp.Maximize(v @ W @ v), cons)
    problem.solve(solver="CLARABEL")
    return problem.value - 1


def k_support_norm_conic(x, k):
    a = cp.Variable(len(x))
    problem = cp.Problem(cp.Maximize(x @ a), [cp.sum_largest(cp.square(a), k) <= 1])
    problem.solve(solver="CLARABEL")
    return problem.value


@pytest.mark.filterwarnings("ignore:Solution may be inaccurate")
def test_value_matches_sdp_on_random_states():
    rng = np.random.default_rng(7)
    for _ in range(6):
        n = int(rng.integers(3, 6))
        v = canonicalize(random_state(rng, n)).entries
        for k in range(2, n):
            assert robustness_value(canonicalize(v), k).value == pytest.approx(
                generalized_robustness_dual(v, k), abs=1e-6)


def test_k_support_norm_matches_conic_dual():
    rng = np.random.default_rng(8)
    for _ in range(10):
        x = rng.normal(size=6)
        for k in (1, 2, 4, 6):
            assert k_support_norm(x, k) == pytest.approx(k_support_norm_conic(x, k), rel=1e-6)
