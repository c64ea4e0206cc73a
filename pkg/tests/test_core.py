import numpy as np
import pytest
from fractions import Fraction

from kcoherence import ValidationError, canonicalize, select_branch, tail_sums
from kcoherence.core import boundary_margin, branch_for, check_k

from conftest import EX4, random_state


def brute_force_ell(v, k):
    r'''Largest l in 2..k with v_{l-1} >= s_l/(k-l+1), else 1 (1-based indices).'''
    best = 1
    for ell in range(2, k + 1):
        s_ell = sum(v[ell - 1:])
        if v[ell - 2] >= s_ell / (k - ell + 1):
            best = ell
    return best


def test_canonicalize_sorts_moduli_and_records_phases():
    state = canonicalize(np.array([0, 0.6j, 0.8]))
    np.testing.assert_allclose(state.entries, [0.8, 0.6, 0.0])
    np.testing.assert_allclose(state.phases, [1, 1j, 1])
    assert list(state.permutation) == [2, 1, 0]
    np.testing.assert_allclose(state.reconstruct(), [0, 0.6j, 0.8])


def test_canonicalize_basis_state_is_fixed_point():
    state = canonicalize([1.0, 0, 0, 0])
    assert list(state.entries) == [1, 0, 0, 0]
    assert list(state.permutation) == [0, 1, 2, 3]


def test_canonicalize_removes_global_phase():
    raw = np.full(4, 0.5) * np.exp(1j * np.pi / 4)
    state = canonicalize(raw)
    np.testing.assert_allclose(state.entries, 0.5, atol=1e-15)
    np.testing.assert_allclose(state.phases, np.exp(1j * np.pi / 4))
    np.testing.assert_allclose(state.reconstruct(), raw)


def test_canonicalize_is_idempotent(rng):
    for n in range(1, 9):
        once = canonicalize(random_state(rng, n))
        twice = canonicalize(once.entries)
        assert np.array_equal(once.entries, twice.entries)
        assert list(twice.permutation) == list(range(n))


def test_canonicalize_ties_keep_input_order():
    state = canonicalize([0.5, -0.5, 0.5, 0.5])
    assert list(state.permutation) == [0, 1, 2, 3]
    assert list(state.phases) == [1, -1, 1, 1]


def test_canonicalize_rescales_within_tolerance():
    state = canonicalize([0.6 * (1 + 1e-10), 0.8 * (1 + 1e-10)])
    assert abs(np.linalg.norm(state.entries) - 1) < 1e-15


@pytest.mark.parametrize("raw", [[], [1.0, 1.0], [0.0, 0.0], [np.nan, 1.0], [np.inf]])
def test_canonicalize_rejects_non_states(raw):
    with pytest.raises(ValidationError):
        canonicalize(raw)


def test_exact_canonicalize():
    state = canonicalize(["3/5", "-4/5"], exact=True)
    assert list(state.entries) == [Fraction(4, 5), Fraction(3, 5)]
    assert state.exact
    with pytest.raises(ValidationError):
        canonicalize([0.6, 0.8000001], exact=True)
    with pytest.raises(ValidationError):
        canonicalize(["1/3"] * 9, exact=True)


def test_tail_sums():
    np.testing.assert_allclose(tail_sums(np.array([0.5, 0.3, 0.2])), [1.0, 0.5, 0.2])


def test_branch_examples():
    assert select_branch(canonicalize([1.0, 0, 0]), 2).ell == 2
    assert select_branch(canonicalize([0.5] * 4), 2).ell == 1
    branch = select_branch(canonicalize(EX4), 3)
    assert branch.ell == 2
    assert branch.s_ell == pytest.approx(1.203526, abs=1e-6)
    assert branch.alpha == pytest.approx(0.601763, abs=1e-6)
    assert branch.beta_sq == pytest.approx(1.224238, abs=1e-6)
    assert branch.tail_width == 2


def test_branch_matches_brute_force(rng):
    for _ in range(300):
        v = canonicalize(random_state(rng, int(rng.integers(2, 11)))).entries
        for k in range(2, len(v) + 1):
            assert branch_for(v, k).ell == brute_force_ell(list(v), k)


def test_branch_tie_resolves_to_larger_index():
    # v_1 = s_2 / 2 exactly for k = 3
    v = np.array([1, 0.5, 0.5, 0.5, 0.5]) / np.sqrt(2)
    assert v[0] == tail_sums(v)[1] / 2
    assert branch_for(v, 3).ell == 2
    assert boundary_margin(v, 3) == 0


def test_forced_branch():
    v = canonicalize(EX4).entries
    assert branch_for(v, 3, ell=1).ell == 1
    assert branch_for(v, 3, ell=1).alpha == pytest.approx(sum(v) / 3)


@pytest.mark.parametrize("k", [1, 5, 2.0, True, "2"])
def test_check_k_rejects(k):
    with pytest.raises(ValidationError):
        check_k(k, 4)
